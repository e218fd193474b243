import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
  GRID_COLS,
  GRID_ROWS,
  cellCenter,
  cellFromCoord,
  cellLabel,
  emptyBoard,
  exportSequence,
  importSequence,
  selectHold,
  setActiveLimb,
  setMode,
} from "../src/board.js";

const exportedFixture = JSON.parse(
  readFileSync(new URL("../fixtures/exported_sequence.json", import.meta.url), "utf8")
);

describe("grid geometry", () => {
  it("maps cells to normalized centers", () => {
    expect(cellCenter({ col: 0, row: 0 })).toEqual({ x: 0.5 / 11, y: 0.5 / 18 });
    expect(cellCenter({ col: 10, row: 17 })).toEqual({ x: 10.5 / 11, y: 17.5 / 18 });
  });

  it("rejects off-board cells", () => {
    expect(() => cellCenter({ col: 11, row: 0 })).toThrow("outside");
    expect(() => cellCenter({ col: 0, row: -1 })).toThrow("outside");
  });

  it("labels cells with column letters and bottom-up rows", () => {
    expect(cellLabel({ col: 0, row: GRID_ROWS - 1 })).toBe("A1");
    expect(cellLabel({ col: 10, row: 0 })).toBe("K18");
  });

  it("every cell center round-trips through cellFromCoord", () => {
    for (let col = 0; col < GRID_COLS; col++) {
      for (let row = 0; row < GRID_ROWS; row++) {
        const { x, y } = cellCenter({ col, row });
        expect(cellFromCoord(x, y)).toEqual({ col, row });
      }
    }
  });
});

describe("selection", () => {
  it("move mode appends order indices 0,1,2", () => {
    let state = emptyBoard("move");
    state = selectHold(state, { col: 1, row: 5 });
    state = setActiveLimb(state, "RH");
    state = selectHold(state, { col: 2, row: 4 });
    state = selectHold(state, { col: 1, row: 5 }); // revisit appends
    expect(state.moves.map((m) => m.orderIndex)).toEqual([0, 1, 2]);
    expect(state.moves.map((m) => m.limb)).toEqual(["LH", "RH", "RH"]);
  });

  it("holds mode double click toggles to empty", () => {
    let state = emptyBoard("holds");
    state = selectHold(state, { col: 0, row: GRID_ROWS - 1 }); // A1
    state = selectHold(state, { col: 0, row: GRID_ROWS - 1 });
    expect(state.holds).toEqual([]);
  });

  it("holds mode keeps selections unordered and limb-free", () => {
    let state = emptyBoard("holds");
    state = selectHold(state, { col: 3, row: 3 });
    state = selectHold(state, { col: 4, row: 2 });
    const payload = exportSequence(state) as { holds: [number, number][] };
    expect(payload.holds).toHaveLength(2);
    expect(payload).not.toHaveProperty("order");
    expect(payload).not.toHaveProperty("moves");
  });

  it("all exported coordinates lie on cell centers", () => {
    let state = emptyBoard("move");
    state = selectHold(state, { col: 7, row: 11 });
    const payload = exportSequence(state) as { moves: { x: number; y: number }[] };
    const { x, y } = cellCenter({ col: 7, row: 11 });
    expect(payload.moves[0].x).toBe(x);
    expect(payload.moves[0].y).toBe(y);
  });
});

describe("export/import", () => {
  it("scripted interaction export matches the committed fixture exactly", () => {
    let state = emptyBoard("move");
    state = selectHold(state, { col: 2, row: 15 });
    state = setActiveLimb(state, "RH");
    state = selectHold(state, { col: 6, row: 15 });
    state = setActiveLimb(state, "LH");
    state = selectHold(state, { col: 4, row: 10 });
    const exported = exportSequence(state);
    expect(exported).toEqual(exportedFixture);
    // byte-compatible with the service schema copy
    expect(JSON.stringify(exported)).toBe(
      readFileSync(new URL("../fixtures/exported_sequence.json", import.meta.url), "utf8")
    );
  });

  it("import(export(x)) restores an identical board", () => {
    let state = emptyBoard("move");
    state = selectHold(state, { col: 2, row: 15 });
    state = setActiveLimb(state, "RF");
    state = selectHold(state, { col: 8, row: 9 });
    const restored = importSequence(JSON.parse(JSON.stringify(exportSequence(state))));
    expect(restored.moves).toEqual(state.moves);
    expect(restored.mode).toBe("move");
    expect(exportSequence(restored)).toEqual(exportSequence(state));
  });

  it("holds round-trip", () => {
    let state = emptyBoard("holds");
    state = selectHold(state, { col: 5, row: 5 });
    state = selectHold(state, { col: 6, row: 4 });
    const restored = importSequence(exportSequence(state));
    expect(restored.holds).toEqual(state.holds);
    expect(restored.mode).toBe("holds");
  });

  it("imported fixture renders the documented example sequence", () => {
    const restored = importSequence(exportedFixture);
    expect(restored.moves).toHaveLength(3);
    expect(restored.moves[1].limb).toBe("RH");
    expect(restored.moves.map((m) => m.orderIndex)).toEqual([0, 1, 2]);
  });

  it("rejects malformed payloads with a readable message", () => {
    expect(() => importSequence(null)).toThrow("object");
    expect(() => importSequence({ other: 1 })).toThrow("'moves' or 'holds'");
    expect(() => importSequence({ moves: [{ x: 0.1 }] })).toThrow("moves[0]");
    expect(() => importSequence({ moves: [{ x: 0.1, y: 0.2, limb: "XX" }] })).toThrow("limb");
    expect(() => importSequence({ holds: [[0.1]] })).toThrow("holds[0]");
  });

  it("export of an empty board is refused", () => {
    expect(() => exportSequence(emptyBoard("move"))).toThrow("nothing selected");
    expect(() => exportSequence(setMode(emptyBoard(), "holds"))).toThrow("nothing selected");
  });
});
