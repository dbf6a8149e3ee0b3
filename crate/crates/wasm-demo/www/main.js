import init, { ccm_spectrum_db, complexity_curves, nmse_curves } from "./pkg/swp_lmmse_wasm_demo.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

// Draws one or more series on a canvas. xs is shared; ys is an array of arrays.
function plot(canvas, xs, ys, { xlabel, ylabel, logx = false }) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, L = 60, R = 15, T = 10, B = 35;
  ctx.clearRect(0, 0, W, H);
  const fx = logx ? Math.log2 : (v) => v;
  const finite = ys.flat().filter(Number.isFinite);
  const [x0, x1] = [fx(Math.min(...xs)), fx(Math.max(...xs))];
  let [y0, y1] = [Math.min(...finite), Math.max(...finite)];
  if (y0 === y1) { y0 -= 1; y1 += 1; }
  const px = (v) => L + ((fx(v) - x0) / (x1 - x0 || 1)) * (W - L - R);
  const py = (v) => H - B - ((v - y0) / (y1 - y0)) * (H - T - B);

  ctx.strokeStyle = "#999"; ctx.fillStyle = "#444"; ctx.font = "11px sans-serif";
  ctx.strokeRect(L, T, W - L - R, H - T - B);
  for (let i = 0; i <= 4; i++) {
    const v = y0 + ((y1 - y0) * i) / 4;
    ctx.fillText(v.toPrecision(3), 4, py(v) + 4);
  }
  const ticks = xs.length <= 16 ? xs : xs.filter((_, i) => i % Math.ceil(xs.length / 16) === 0);
  for (const v of ticks) ctx.fillText(String(v), px(v) - 8, H - B + 14);
  ctx.fillText(xlabel, W / 2 - 20, H - 4);
  ctx.save(); ctx.translate(12, H / 2 + 30); ctx.rotate(-Math.PI / 2); ctx.fillText(ylabel, 0, 0); ctx.restore();

  ys.forEach((series, s) => {
    ctx.strokeStyle = COLORS[s % COLORS.length]; ctx.fillStyle = ctx.strokeStyle;
    ctx.beginPath();
    series.forEach((v, i) => {
      if (!Number.isFinite(v)) return;
      i === 0 ? ctx.moveTo(px(xs[i]), py(v)) : ctx.lineTo(px(xs[i]), py(v));
    });
    ctx.stroke();
    series.forEach((v, i) => Number.isFinite(v) && ctx.fillRect(px(xs[i]) - 2, py(v) - 2, 4, 4));
  });
}

function legend(el, names) {
  el.innerHTML = names.map((n, i) => `<span style="color:${COLORS[i]}">&#9632; ${n}</span>`).join("");
}

// Splits a flat row-major table into columns.
function columns(flat, width) {
  const cols = Array.from({ length: width }, () => []);
  flat.forEach((v, i) => cols[i % width].push(v));
  return cols;
}

function guarded(msgId, f) {
  return () => {
    const msg = $(msgId);
    msg.className = ""; msg.textContent = "working...";
    // let the message paint before the synchronous computation starts
    setTimeout(() => {
      const t0 = performance.now();
      try {
        f();
        msg.textContent = `done in ${(performance.now() - t0).toFixed(0)} ms`;
      } catch (e) {
        msg.className = "err"; msg.textContent = String(e.message ?? e);
      }
    }, 10);
  };
}

function spectrum() {
  const db = ccm_spectrum_db(num("sp-n"), num("sp-f"), num("sp-rt"), num("sp-rr"), num("sp-d"));
  plot($("sp-plot"), [...db.keys()], [Array.from(db)], { xlabel: "DFT bin k", ylabel: "eigenvalue [dB]" });
}

function complexity() {
  const [n, ...series] = columns(Array.from(complexity_curves(num("cx-t"))), 5);
  legend($("cx-legend"), ["swp-known", "swp-unknown", "direct-known", "direct-unknown"]);
  plot($("cx-plot"), n, series, { xlabel: "N", ylabel: "log10 MADs", logx: true });
}

function nmse() {
  const snr = new Float64Array([-10, -5, 0, 5, 10, 15, 20]);
  const flat = nmse_curves(num("mc-n"), num("mc-t"), num("mc-trials"), num("mc-seed"), snr);
  const [x, ...series] = columns(Array.from(flat), 4);
  legend($("mc-legend"), ["ls", "lmmse-swp-unknown", "lmmse-swp-known"]);
  plot($("mc-plot"), x, series.map((s) => s.map(Math.log10)), { xlabel: "SNR [dB]", ylabel: "log10 NMSE" });
}

await init();
$("sp-go").onclick = guarded("sp-msg", spectrum);
$("cx-go").onclick = guarded("cx-msg", complexity);
$("mc-go").onclick = guarded("mc-msg", nmse);
$("sp-go").click();
$("cx-go").click();
