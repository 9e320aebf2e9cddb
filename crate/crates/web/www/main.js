import init, { werner_scan, weak_value_curve, game_trajectory } from "./pkg/pplab_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

// Line plot of ys against xs; `flag` marks points drawn in red, `hline` adds a reference line.
function plot(canvas, xs, ys, { flag = [], hline = null } = {}) {
  const g = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  g.clearRect(0, 0, w, h);
  if (!xs.length) return;
  const all = hline === null ? ys : ys.concat([hline]);
  let lo = Math.min(...all), hi = Math.max(...all);
  if (hi - lo < 1e-9) { lo -= 1; hi += 1; }
  const x0 = Math.min(...xs), x1 = Math.max(...xs);
  const px = (x) => 30 + (w - 40) * (x - x0) / (x1 - x0 || 1);
  const py = (y) => h - 20 - (h - 40) * (y - lo) / (hi - lo);
  g.strokeStyle = "#999";
  if (hline !== null) { g.beginPath(); g.moveTo(30, py(hline)); g.lineTo(w - 10, py(hline)); g.stroke(); }
  g.fillStyle = "#333";
  g.fillText(hi.toPrecision(3), 0, 15);
  g.fillText(lo.toPrecision(3), 0, h - 20);
  g.strokeStyle = "#2060c0";
  g.beginPath();
  xs.forEach((x, i) => (i ? g.lineTo(px(x), py(ys[i])) : g.moveTo(px(x), py(ys[i]))));
  g.stroke();
  g.fillStyle = "#d02020";
  xs.forEach((x, i) => flag[i] && g.fillRect(px(x) - 1.5, py(ys[i]) - 1.5, 3, 3));
}

function call(fn, out) {
  const r = JSON.parse(fn());
  if (r.error) { $(out).textContent = "error: " + r.error; return null; }
  return r;
}

function scan() {
  $("scan-alpha-v").textContent = num("scan-alpha").toFixed(2);
  const pts = call(() => werner_scan($("scan-test").value, num("scan-alpha"), 201), "scan-out");
  if (!pts) return;
  plot($("scan-plot"), pts.map((p) => p.eta), pts.map((p) => p.statistic), { flag: pts.map((p) => p.verdict), hline: 0 });
  const first = pts.find((p) => p.verdict);
  $("scan-out").textContent = first ? `flags nonclassicality from eta = ${first.eta.toFixed(3)} (red)` : "never flags";
}

function weak() {
  const pts = call(() => weak_value_curve(num("wv-pre"), num("wv-axis"), 720), "wv-out");
  if (!pts) return;
  plot($("wv-plot"), pts.map((p) => p.phi), pts.map((p) => Math.max(-10, Math.min(10, p.re))), { flag: pts.map((p) => p.anomalous), hline: 0 });
  const n = pts.filter((p) => p.anomalous).length;
  $("wv-out").textContent = `Re A_w vs post-selection angle (clipped to ±10); ${n} anomalous points in red`;
}

function game() {
  const r = call(() => game_trajectory(num("g-bt"), num("g-bp"), num("g-at"), num("g-ap"), 2 * Math.PI, 401), "g-out");
  if (!r) return;
  plot($("g-plot"), r.trajectory.map((p) => p.t), r.trajectory.map((p) => p.score), { hline: 1 });
  $("g-out").textContent = `best score ${r.best_score.toFixed(4)} at t = ${r.best_time.toFixed(3)}` + (r.wins ? " — beats the classical bound" : "");
}

await init();
["scan-test", "scan-alpha"].forEach((id) => $(id).addEventListener("input", scan));
["wv-pre", "wv-axis"].forEach((id) => $(id).addEventListener("input", weak));
["g-bt", "g-bp", "g-at", "g-ap"].forEach((id) => $(id).addEventListener("input", game));
scan(); weak(); game();
