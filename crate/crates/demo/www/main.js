import init, { profile, wave_curves, simulate_short } from "./pkg/inflow_demo.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const num = (id) => parseFloat(document.getElementById(id).value);
const el = (id) => document.getElementById(id);

function report(id, text, isError = false) {
  const node = el(id);
  node.textContent = text;
  node.className = isError ? "err" : "";
}

// Minimal line plot: series = [{x, y, color, dash, label}], optional log y axis.
function plot(canvas, series, { logY = false, points = [] } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, pad = 48;
  ctx.clearRect(0, 0, W, H);
  const ty = (y) => (logY ? Math.log10(y) : y);
  let xs = [], ys = [];
  for (const s of series) {
    s.x.forEach((x, i) => {
      const y = ty(s.y[i]);
      if (Number.isFinite(x) && Number.isFinite(y)) { xs.push(x); ys.push(y); }
    });
  }
  for (const p of points) { xs.push(p.x); ys.push(ty(p.y)); }
  if (xs.length === 0) return;
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y1 - y0 < 1e-12) { y0 -= 0.5; y1 += 0.5; }
  const px = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (W - 2 * pad);
  const py = (y) => H - pad + ((y0 - y) / (y1 - y0)) * (H - 2 * pad);

  ctx.strokeStyle = "#999"; ctx.lineWidth = 1; ctx.setLineDash([]);
  ctx.strokeRect(pad, pad / 2, W - 2 * pad, H - 1.5 * pad);
  ctx.fillStyle = "#444"; ctx.font = "11px sans-serif";
  for (let k = 0; k <= 4; k++) {
    const x = x0 + (k / 4) * (x1 - x0), y = y0 + (k / 4) * (y1 - y0);
    ctx.fillText(x.toPrecision(3), px(x) - 12, H - pad + 16);
    ctx.fillText(logY ? `1e${y.toFixed(1)}` : y.toPrecision(3), 2, py(y) + 4);
  }
  for (const s of series) {
    ctx.strokeStyle = s.color; ctx.lineWidth = s.width || 1.6; ctx.setLineDash(s.dash || []);
    ctx.beginPath();
    let pen = false;
    s.x.forEach((x, i) => {
      const y = ty(s.y[i]);
      if (!Number.isFinite(y)) { pen = false; return; }
      pen ? ctx.lineTo(px(x), py(y)) : ctx.moveTo(px(x), py(y));
      pen = true;
    });
    ctx.stroke();
  }
  ctx.setLineDash([]);
  for (const p of points) {
    ctx.fillStyle = p.color;
    ctx.beginPath(); ctx.arc(px(p.x), py(ty(p.y)), 4, 0, 2 * Math.PI); ctx.fill();
  }
}

function runProfile() {
  try {
    const p = JSON.parse(profile(num("gamma"), num("mu"), num("vm"), num("um"), num("vp"), 600));
    report("profile-info",
      `s = ${p.s.toFixed(6)}   delta = ${p.delta.toPrecision(4)}   u+ = ${p.u_plus.toFixed(6)}\n` +
      `c- = ${p.c_minus.toFixed(4)} (tail fit ${p.fitted_c_minus.toFixed(4)})   ` +
      `c+ = ${p.c_plus.toFixed(4)} (tail fit ${p.fitted_c_plus.toFixed(4)})`);
    plot(el("profile-plot"), [
      { x: p.xi, y: p.v, color: COLORS[0], label: "V" },
      { x: p.xi, y: p.u, color: COLORS[1], label: "U" },
    ]);
  } catch (e) {
    report("profile-info", String(e), true);
  }
}

function runCurves() {
  try {
    const w = JSON.parse(wave_curves(num("gamma"), num("vm"), num("um"), num("vmax"), 300));
    report("curves-info",
      `w- is ${w.region}; sonic point w* = (${w.sonic.v.toFixed(5)}, ${w.sonic.u.toFixed(5)})`);
    const series = w.curves.map((c, i) => ({ x: c.v, y: c.u, color: COLORS[i % COLORS.length], label: c.name }));
    series.push({ x: w.sonic_curve.v, y: w.sonic_curve.u, color: "#777", dash: [5, 4], label: w.sonic_curve.name });
    plot(el("curves-plot"), series, {
      points: [
        { x: num("vm"), y: num("um"), color: "#000" },
        { x: w.sonic.v, y: w.sonic.u, color: "#e377c2" },
      ],
    });
    el("curves-legend").innerHTML = series
      .map((s) => `<span style="color:${s.color}">&#9644; ${s.label}</span>`)
      .join("") + `<span>&#9679; w-</span><span style="color:#e377c2">&#9679; w*</span>`;
  } catch (e) {
    report("curves-info", String(e), true);
  }
}

let sim = null;

function drawFrame(k) {
  if (!sim) return;
  const f = sim.frames[k];
  plot(el("sim-plot"), [
    { x: sim.xi, y: f.v_ref, color: "#999", dash: [5, 4], label: "shifted profile" },
    { x: sim.xi, y: f.v, color: COLORS[0], label: "v" },
  ]);
  el("sim-info").textContent =
    `t = ${f.t.toFixed(3)}   sigma = ${sim.sigma.toExponential(3)}   beta = ${sim.beta.toFixed(2)}   ` +
    `L = ${sim.length.toFixed(1)}   steps = ${sim.steps}   verdict: ${sim.verdict}`;
}

function runSim() {
  report("sim-info", "running...");
  // let the status text paint before the synchronous run
  setTimeout(() => {
    try {
      sim = JSON.parse(simulate_short(num("gamma"), num("mu"), num("vm"), num("um"), num("vp"),
        num("beta"), num("amp"), Math.round(num("cells")), num("tend"), 40));
      const slider = el("frame");
      slider.max = sim.frames.length - 1;
      slider.value = 0;
      drawFrame(0);
      plot(el("sim-decay"), [
        { x: sim.t, y: sim.sup_dev, color: COLORS[1], label: "sup |(v,u) - (V,U)|" },
        { x: sim.t, y: sim.l2_phi, color: COLORS[2], label: "||phi||" },
      ], { logY: true });
    } catch (e) {
      sim = null;
      report("sim-info", String(e), true);
    }
  }, 20);
}

await init();
el("run-profile").onclick = runProfile;
el("run-curves").onclick = runCurves;
el("run-sim").onclick = runSim;
el("frame").oninput = (e) => drawFrame(parseInt(e.target.value, 10));
runProfile();
runCurves();
