// Thin client for the backend service.

import type { HoldsSequencePayload, MoveSequencePayload } from "./board.js";
import type { ClipJson } from "./playback.js";
import type { PredictionResponse } from "./overlay.js";

export class ServiceError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function post<T>(base: string, path: string, body: unknown): Promise<T> {
  const response = await fetch(`${base}${path}`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!response.ok) {
    let detail = response.statusText;
    try {
      detail = (await response.json()).detail ?? detail;
    } catch {
      // keep statusText
    }
    throw new ServiceError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(public base: string = "") {}

  async health(): Promise<boolean> {
    try {
      const r = await fetch(`${this.base}/health`);
      return r.ok;
    } catch {
      return false;
    }
  }

  storeSequence(payload: MoveSequencePayload | HoldsSequencePayload): Promise<{ id: string }> {
    return post(this.base, "/sequences", payload);
  }

  animate(sequenceId: string, framesPerMove: number): Promise<ClipJson> {
    return post(this.base, "/animate", {
      sequence_id: sequenceId,
      frames_per_move: framesPerMove,
    });
  }

  predictOrder(
    holds: [number, number][],
    model: "art" | "simple",
    order?: number[]
  ): Promise<PredictionResponse> {
    const body: Record<string, unknown> = { holds, model };
    if (order) body.order = order;
    return post(this.base, "/predict-order", body);
  }

  translate(holdsSentence: string[]): Promise<{ move_sentence: string[] }> {
    return post(this.base, "/translate", { holds_sentence: holdsSentence });
  }
}
