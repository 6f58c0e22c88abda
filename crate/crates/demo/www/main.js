import init, { generate, reduce, solve } from "./pkg/qubo_prep_demo.js";

const $ = (id) => document.getElementById(id);

function esc(s) {
  return String(s).replace(/[&<>]/g, (c) => ({ "&": "&amp;", "<": "&lt;", ">": "&gt;" })[c]);
}

function guard(target, f) {
  try {
    f();
  } catch (e) {
    target.innerHTML = `<p class="error">${esc(e.message ?? e)}</p>`;
  }
}

function showReduction(r) {
  const rules = Object.entries(r.firings)
    .map(([rule, k]) => `<tr><td>${rule}</td><td>${k}</td></tr>`)
    .join("");
  const top = Math.max(1, ...r.pass_drops);
  const bars = r.pass_drops
    .map((d, i) => `<div title="pass ${i + 1}: ${d}" style="height:${(100 * d) / top}%"></div>`)
    .join("");
  const events = r.events
    .map((e) => `<li class="${e.residual ? "residual" : ""}">pass ${e.pass} rule ${e.rule}: ${esc(e.effect)}</li>`)
    .join("");
  const more = r.events_total > r.events.length ? `<p>(${r.events_total - r.events.length} more not shown)</p>` : "";
  $("out").innerHTML = `
    <p><b>${r.n} → ${r.survivors}</b> variables (${r.percent.toFixed(1)}% removed),
       offset ${r.offset_before} → ${r.offset_after}, ${r.pass_drops.length} passes.</p>
    <table><tr><th>rule</th><th>firings</th></tr>${rules}</table>
    <p>Variables removed per pass:</p><div class="bars">${bars}</div>
    <details><summary>Log</summary><ol>${events}</ol>${more}</details>
    <details><summary>Reduced instance</summary><textarea readonly>${esc(r.reduced)}</textarea></details>`;
}

function showSolve(label, s) {
  const line = document.createElement("p");
  line.innerHTML = `${label}: optimum <b>${s.optimum}</b> over ${s.solved_size} free variables
    (${s.evaluated} assignments), x = <code>${s.assignment}</code>`;
  $("solved").prepend(line);
}

await init();

$("generate").onclick = () =>
  guard($("out"), () => {
    $("text").value = generate(+$("n").value, +$("edges").value, +$("row").value, +$("seed").value);
    $("out").innerHTML = "";
  });
$("reduce").onclick = () => guard($("out"), () => showReduction(JSON.parse(reduce($("text").value, $("residual").checked))));
$("solve").onclick = () => guard($("solved"), () => showSolve("direct", JSON.parse(solve($("text").value, false))));
$("solve-pre").onclick = () => guard($("solved"), () => showSolve("reduced first", JSON.parse(solve($("text").value, true))));
