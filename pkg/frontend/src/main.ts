// Board authoring UI: click holds, assign limbs, reorder by re-clicking,
// request skeleton playback and order predictions from the service.

import {
  BoardState,
  GRID_COLS,
  GRID_ROWS,
  LIMBS,
  Limb,
  Mode,
  cellFromCoord,
  clearSelection,
  emptyBoard,
  exportSequence,
  importSequence,
  selectHold,
  setActiveLimb,
  setMode,
} from "./board.js";
import { ApiClient, ServiceError } from "./api.js";
import { Badge, predictionBadges, userRanks } from "./overlay.js";
import { ClipPlayer, SKELETON_EDGES } from "./playback.js";

const LIMB_COLORS: Record<Limb, string> = {
  LH: "#d9482b",
  RH: "#2b6fd9",
  LF: "#d9a02b",
  RF: "#2bd98f",
};

const app = document.getElementById("app");
if (app) {
  app.innerHTML = `
    <div id="layout">
      <section>
        <h2>Board</h2>
        <div id="controls">
          <label><input type="radio" name="mode" value="move" checked> move sequence</label>
          <label><input type="radio" name="mode" value="holds"> holds sequence</label>
          <span id="limbs"></span>
          <button id="clear">Clear</button>
          <button id="predict">Predict order</button>
          <button id="animate">Animate</button>
        </div>
        <canvas id="board" width="330" height="540" style="border:1px solid #888"></canvas>
        <div>
          <button id="export">Export JSON</button>
          <button id="import">Import JSON</button>
          <textarea id="json" rows="6" cols="48" spellcheck="false"></textarea>
        </div>
        <div id="status"></div>
      </section>
      <section>
        <h2>Playback</h2>
        <canvas id="player" width="330" height="540" style="border:1px solid #888"></canvas>
        <div>
          <button id="play">Play</button>
          <button id="pause">Pause</button>
          <input id="scrub" type="range" min="0" max="0" value="0" style="width:220px">
          <span id="frameinfo"></span>
        </div>
      </section>
    </div>`;

  let state: BoardState = emptyBoard("move");
  let badges: Badge[] = [];
  let player: ClipPlayer | null = null;
  let pendingRequest = false;

  const api = new ApiClient("");
  const board = document.getElementById("board") as HTMLCanvasElement;
  const playerCanvas = document.getElementById("player") as HTMLCanvasElement;
  const jsonBox = document.getElementById("json") as HTMLTextAreaElement;
  const status = document.getElementById("status") as HTMLDivElement;
  const scrub = document.getElementById("scrub") as HTMLInputElement;
  const frameInfo = document.getElementById("frameinfo") as HTMLSpanElement;

  const limbSpan = document.getElementById("limbs") as HTMLSpanElement;
  for (const limb of LIMBS) {
    const btn = document.createElement("button");
    btn.textContent = limb;
    btn.style.borderColor = LIMB_COLORS[limb];
    btn.onclick = () => {
      state = setActiveLimb(state, limb);
      drawBoard();
    };
    limbSpan.appendChild(btn);
  }

  function toast(message: string): void {
    status.textContent = message;
    setTimeout(() => {
      if (status.textContent === message) status.textContent = "";
    }, 4000);
  }

  function drawBoard(): void {
    const ctx = board.getContext("2d")!;
    const w = board.width;
    const h = board.height;
    ctx.clearRect(0, 0, w, h);
    ctx.strokeStyle = "#ccc";
    for (let c = 0; c <= GRID_COLS; c++) {
      ctx.beginPath();
      ctx.moveTo((c * w) / GRID_COLS, 0);
      ctx.lineTo((c * w) / GRID_COLS, h);
      ctx.stroke();
    }
    for (let r = 0; r <= GRID_ROWS; r++) {
      ctx.beginPath();
      ctx.moveTo(0, (r * h) / GRID_ROWS);
      ctx.lineTo(w, (r * h) / GRID_ROWS);
      ctx.stroke();
    }
    ctx.font = "11px sans-serif";
    if (state.mode === "move") {
      for (const move of state.moves) {
        ctx.fillStyle = LIMB_COLORS[move.limb];
        ctx.beginPath();
        ctx.arc(move.x * w, move.y * h, 9, 0, 2 * Math.PI);
        ctx.fill();
        ctx.fillStyle = "#fff";
        ctx.fillText(String(move.orderIndex), move.x * w - 3, move.y * h + 4);
      }
    } else {
      const ranks = userRanks(undefined, state.holds.length);
      state.holds.forEach((hold, i) => {
        ctx.fillStyle = "#555";
        ctx.beginPath();
        ctx.arc(hold.x * w, hold.y * h, 9, 0, 2 * Math.PI);
        ctx.fill();
        const rank = ranks.get(i);
        if (rank !== undefined) {
          ctx.fillStyle = "#fff";
          ctx.fillText(String(rank), hold.x * w - 3, hold.y * h + 4);
        }
      });
    }
    for (const badge of badges) {
      if (badge.pad || Number.isNaN(badge.x)) continue;
      ctx.strokeStyle = "#7a1fa2";
      ctx.beginPath();
      ctx.arc(badge.x * w + 10, badge.y * h - 10, 8, 0, 2 * Math.PI);
      ctx.stroke();
      ctx.fillStyle = "#7a1fa2";
      ctx.fillText(String(badge.rank), badge.x * w + 7, badge.y * h - 6);
    }
  }

  function drawPlayerFrame(): void {
    const ctx = playerCanvas.getContext("2d")!;
    ctx.clearRect(0, 0, playerCanvas.width, playerCanvas.height);
    if (!player) return;
    const pts = player.frameLandmarks(playerCanvas.width, playerCanvas.height);
    ctx.strokeStyle = "#28508c";
    ctx.lineWidth = 2;
    for (const [a, b] of SKELETON_EDGES) {
      ctx.beginPath();
      ctx.moveTo(pts[a][0], pts[a][1]);
      ctx.lineTo(pts[b][0], pts[b][1]);
      ctx.stroke();
    }
    ctx.fillStyle = "#c83c28";
    for (const [x, y] of pts) {
      ctx.beginPath();
      ctx.arc(x, y, 3, 0, 2 * Math.PI);
      ctx.fill();
    }
    scrub.value = String(player.currentFrame);
    frameInfo.textContent = `${player.currentFrame + 1}/${player.frameCount}`;
  }

  board.addEventListener("click", (event) => {
    const rect = board.getBoundingClientRect();
    const cell = cellFromCoord(
      (event.clientX - rect.left) / rect.width,
      (event.clientY - rect.top) / rect.height
    );
    state = selectHold(state, cell);
    badges = [];
    drawBoard();
  });

  for (const radio of document.querySelectorAll<HTMLInputElement>("input[name=mode]")) {
    radio.onchange = () => {
      state = setMode(state, radio.value as Mode);
      badges = [];
      drawBoard();
    };
  }

  (document.getElementById("clear") as HTMLButtonElement).onclick = () => {
    state = clearSelection(state);
    badges = [];
    drawBoard();
  };

  (document.getElementById("export") as HTMLButtonElement).onclick = () => {
    try {
      jsonBox.value = JSON.stringify(exportSequence(state));
    } catch (err) {
      toast(String(err));
    }
  };

  (document.getElementById("import") as HTMLButtonElement).onclick = () => {
    try {
      state = importSequence(JSON.parse(jsonBox.value));
      badges = [];
      const radios = document.querySelectorAll<HTMLInputElement>("input[name=mode]");
      radios.forEach((r) => (r.checked = r.value === state.mode));
      drawBoard();
      toast(`imported ${state.mode === "move" ? state.moves.length : state.holds.length} entries`);
    } catch (err) {
      toast(`import failed: ${err}`);
    }
  };

  (document.getElementById("predict") as HTMLButtonElement).onclick = async () => {
    if (pendingRequest) return;
    const holds: [number, number][] =
      state.mode === "holds"
        ? state.holds.map((h) => [h.x, h.y] as [number, number])
        : state.moves.map((m) => [m.x, m.y] as [number, number]);
    if (holds.length < 2) {
      toast("select at least 2 holds first");
      return;
    }
    pendingRequest = true;
    try {
      const response = await api.predictOrder(holds, "art");
      badges = predictionBadges(holds, response);
      drawBoard();
      const pads = badges.filter((b) => b.pad).length;
      toast(pads ? `prediction: ${pads} pad tokens` : "prediction overlaid");
    } catch (err) {
      toast(err instanceof ServiceError ? `service: ${err.message}` : String(err));
    } finally {
      pendingRequest = false;
    }
  };

  (document.getElementById("animate") as HTMLButtonElement).onclick = async () => {
    if (pendingRequest || state.mode !== "move" || state.moves.length === 0) {
      toast("author a move sequence first");
      return;
    }
    pendingRequest = true;
    try {
      const { id } = await api.storeSequence(exportSequence(state));
      const clip = await api.animate(id, 30);
      player = new ClipPlayer(clip);
      scrub.max = String(player.frameCount - 1);
      player.play();
      toast(`clip of ${player.frameCount} frames`);
    } catch (err) {
      toast(err instanceof ServiceError ? `service: ${err.message}` : String(err));
    } finally {
      pendingRequest = false;
    }
  };

  (document.getElementById("play") as HTMLButtonElement).onclick = () => player?.play();
  (document.getElementById("pause") as HTMLButtonElement).onclick = () => player?.pause();
  scrub.oninput = () => {
    player?.pause();
    player?.scrubTo(Number(scrub.value));
    drawPlayerFrame();
  };

  let last = performance.now();
  function loop(now: number): void {
    const dt = (now - last) / 1000;
    last = now;
    if (player) {
      player.tick(dt);
      drawPlayerFrame();
    }
    requestAnimationFrame(loop);
  }

  drawBoard();
  requestAnimationFrame(loop);
}
