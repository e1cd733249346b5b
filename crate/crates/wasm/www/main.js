import init, { exact_stats, simulate, scan } from "./pkg/mermin_wasm.js";

const $ = (id) => document.getElementById(id);
const fmt = (x, d = 5) => (x === null || x === undefined ? "undefined" : Number(x).toFixed(d));

function inputs() {
  return { source: $("source").value, pa: Number($("pa").value), pb: Number($("pb").value) };
}

function guard(fn) {
  try {
    $("error").textContent = "";
    fn();
  } catch (e) {
    $("error").textContent = String(e);
  }
}

function renderExact() {
  const { source, pa, pb } = inputs();
  const { stats } = JSON.parse(exact_stats(source, pa, pb));
  const rows = Object.entries(stats).map(([k, v]) =>
    `<tr><td>${k}</td><td>${v ? v.exact : "undefined"}</td><td>${v ? fmt(v.float) : ""}</td></tr>`);
  $("exact").innerHTML = "<tr><th>field</th><th>exact</th><th>value</th></tr>" + rows.join("");
}

function renderSimulation() {
  const { source, pa, pb } = inputs();
  const n = Math.max(0, Math.floor(Number($("n").value)));
  const seed = Math.max(0, Math.floor(Number($("seed").value)));
  const t0 = performance.now();
  const out = JSON.parse(simulate(source, pa, pb, n, seed));
  const ms = (performance.now() - t0).toFixed(0);
  const ind = out.independence;
  $("sim-summary").textContent = `${n} trials in ${ms} ms` +
    (ind ? `; settings-independence chi2 = ${ind.statistic.toFixed(2)}, p = ${ind.p_value.toExponential(2)}` : "");
  const rows = out.comparison.rows.map((r) =>
    `<tr><td>${r.name}</td><td>${fmt(r.estimate)}</td><td>${fmt(r.std_error)}</td>` +
    `<td>${r.z === null ? "-" : r.z.toFixed(2)}</td>` +
    `<td class="${r.pass ? "ok" : "fail"}">${r.pass ? "ok" : "off"}</td></tr>`);
  $("sim").innerHTML = "<tr><th>field</th><th>estimate</th><th>s.e.</th><th>z</th><th></th></tr>" + rows.join("");
}

const SERIES = [
  ["eta_a", "#1f77b4"],
  ["eta_u_a", "#9467bd"],
  ["p_same_case_b", "#d62728"],
  ["mean_coincidence_rate", "#2ca02c"],
];

function renderScan() {
  const { source, pa, pb } = inputs();
  const { points } = JSON.parse(scan(source, $("param").value, pa, pb, 96));
  const c = $("plot");
  const g = c.getContext("2d");
  const pad = 36;
  const w = c.width - 2 * pad;
  const h = c.height - 2 * pad;
  const X = (p) => pad + p * w;
  const Y = (v) => pad + (1 - v) * h;
  g.clearRect(0, 0, c.width, c.height);
  g.strokeStyle = "#999";
  g.strokeRect(pad, pad, w, h);
  g.fillStyle = "#555";
  g.font = "11px sans-serif";
  for (const v of [0, 0.25, 0.5, 0.75, 1]) {
    g.fillText(v.toFixed(2), 4, Y(v) + 4);
    g.fillText(v.toFixed(2), X(v) - 10, c.height - 12);
  }
  // Mermin's Case-b target
  g.setLineDash([4, 4]);
  g.beginPath();
  g.moveTo(X(0), Y(0.25));
  g.lineTo(X(1), Y(0.25));
  g.stroke();
  g.setLineDash([]);
  for (const [key, colour] of SERIES) {
    g.strokeStyle = colour;
    g.lineWidth = 2;
    g.beginPath();
    let started = false;
    for (const pt of points) {
      if (pt[key] === null) { started = false; continue; }
      if (!started) { g.moveTo(X(pt.p), Y(pt[key])); started = true; } else { g.lineTo(X(pt.p), Y(pt[key])); }
    }
    g.stroke();
  }
  $("legend").innerHTML = SERIES.map(([k, col]) => `<span style="color:${col}">&#9644; ${k}</span>`).join(" &nbsp; ") +
    " &nbsp; <span>- - - 1/4</span>";
}

function refresh() {
  $("pa-val").textContent = $("pa").value;
  $("pb-val").textContent = $("pb").value;
  guard(() => { renderExact(); renderScan(); });
}

await init();
for (const id of ["source", "pa", "pb", "param"]) $(id).addEventListener("input", refresh);
$("run").addEventListener("click", () => guard(renderSimulation));
refresh();
guard(renderSimulation);
