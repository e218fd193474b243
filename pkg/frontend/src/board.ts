// Board model: an 11x18 grid of cells mapped to normalized coordinates,
// plus the user's current sequence draft. All functions are pure; the DOM
// layer in main.ts renders whatever state they return.

export const GRID_COLS = 11;
export const GRID_ROWS = 18;
export const COLUMN_LABELS = "ABCDEFGHIJK";

export type Limb = "LH" | "RH" | "LF" | "RF";
export const LIMBS: Limb[] = ["LH", "RH", "LF", "RF"];

export type Mode = "move" | "holds";

export interface Cell {
  col: number; // 0-based, column A = 0
  row: number; // 0-based from the top; board label row = GRID_ROWS - row
}

export interface MoveSelection {
  x: number;
  y: number;
  limb: Limb;
  orderIndex: number;
}

export interface BoardState {
  mode: Mode;
  activeLimb: Limb;
  moves: MoveSelection[];
  holds: { x: number; y: number }[];
}

export function emptyBoard(mode: Mode = "move"): BoardState {
  return { mode, activeLimb: "LH", moves: [], holds: [] };
}

export function cellLabel(cell: Cell): string {
  return `${COLUMN_LABELS[cell.col]}${GRID_ROWS - cell.row}`;
}

// Normalized center of a cell; row 0 is the top row, y grows downward.
export function cellCenter(cell: Cell): { x: number; y: number } {
  if (cell.col < 0 || cell.col >= GRID_COLS || cell.row < 0 || cell.row >= GRID_ROWS) {
    throw new Error(`cell (${cell.col}, ${cell.row}) outside the ${GRID_COLS}x${GRID_ROWS} board`);
  }
  return { x: (cell.col + 0.5) / GRID_COLS, y: (cell.row + 0.5) / GRID_ROWS };
}

export function cellFromCoord(x: number, y: number): Cell {
  return {
    col: Math.min(GRID_COLS - 1, Math.max(0, Math.floor(x * GRID_COLS))),
    row: Math.min(GRID_ROWS - 1, Math.max(0, Math.floor(y * GRID_ROWS))),
  };
}

// Move mode appends a move with the next order index (re-clicks append a
// revisit); holds mode toggles unordered membership.
export function selectHold(state: BoardState, cell: Cell): BoardState {
  const { x, y } = cellCenter(cell);
  if (state.mode === "move") {
    const move = { x, y, limb: state.activeLimb, orderIndex: state.moves.length };
    return { ...state, moves: [...state.moves, move] };
  }
  const existing = state.holds.findIndex((h) => h.x === x && h.y === y);
  if (existing >= 0) {
    return { ...state, holds: state.holds.filter((_, i) => i !== existing) };
  }
  return { ...state, holds: [...state.holds, { x, y }] };
}

export function setMode(state: BoardState, mode: Mode): BoardState {
  return { ...state, mode };
}

export function setActiveLimb(state: BoardState, limb: Limb): BoardState {
  return { ...state, activeLimb: limb };
}

export function clearSelection(state: BoardState): BoardState {
  return { ...state, moves: [], holds: [] };
}

// --- service payloads ------------------------------------------------------

export interface MoveSequencePayload {
  moves: { x: number; y: number; limb: Limb; order_index: number }[];
}

export interface HoldsSequencePayload {
  holds: [number, number][];
  order?: number[];
}

export function exportSequence(state: BoardState): MoveSequencePayload | HoldsSequencePayload {
  if (state.mode === "move") {
    if (state.moves.length === 0) throw new Error("nothing selected to export");
    return {
      moves: state.moves.map((m) => ({
        x: m.x,
        y: m.y,
        limb: m.limb,
        order_index: m.orderIndex,
      })),
    };
  }
  if (state.holds.length === 0) throw new Error("nothing selected to export");
  return { holds: state.holds.map((h) => [h.x, h.y] as [number, number]) };
}

export function importSequence(payload: unknown): BoardState {
  if (typeof payload !== "object" || payload === null) {
    throw new Error("sequence JSON must be an object");
  }
  const obj = payload as Record<string, unknown>;
  if (Array.isArray(obj.moves)) {
    const moves = obj.moves.map((rec: any, i: number) => {
      if (typeof rec?.x !== "number" || typeof rec?.y !== "number") {
        throw new Error(`moves[${i}]: x and y must be numbers`);
      }
      if (!LIMBS.includes(rec.limb)) {
        throw new Error(`moves[${i}]: limb must be one of ${LIMBS.join(", ")}`);
      }
      const orderIndex = rec.order_index ?? i;
      if (orderIndex !== i) throw new Error(`moves[${i}]: order_index must be ${i}`);
      return { x: rec.x, y: rec.y, limb: rec.limb as Limb, orderIndex };
    });
    return { mode: "move", activeLimb: moves.length ? moves[moves.length - 1].limb : "LH", moves, holds: [] };
  }
  if (Array.isArray(obj.holds)) {
    const holds = obj.holds.map((pair: any, i: number) => {
      if (!Array.isArray(pair) || pair.length !== 2) {
        throw new Error(`holds[${i}]: expected [x, y]`);
      }
      return { x: pair[0] as number, y: pair[1] as number };
    });
    return { mode: "holds", activeLimb: "LH", moves: [], holds };
  }
  throw new Error("sequence JSON needs a 'moves' or 'holds' key");
}
