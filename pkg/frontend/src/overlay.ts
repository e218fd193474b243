// Prediction overlay: map a /predict-order response onto board badges.

export const PAD_ID = 17;

export interface PredictionResponse {
  order: number[];
  accuracy_vs_provided?: number;
}

export interface Badge {
  x: number;
  y: number;
  rank: number; // 0-based usage rank
  pad: boolean; // true when the model predicted the imaginary hold here
}

// order[i] is the id of the hold predicted to be used i-th (or the pad
// token). A hold gets the rank of its first appearance; ranks that predict
// the pad token get a synthetic badge so the failure mode stays visible.
export function predictionBadges(
  holds: [number, number][],
  response: PredictionResponse,
  padId: number = PAD_ID
): Badge[] {
  const badges: Badge[] = [];
  const seen = new Set<number>();
  response.order.forEach((token, rank) => {
    if (token === padId) {
      badges.push({ x: NaN, y: NaN, rank, pad: true });
      return;
    }
    if (token < 0 || token >= holds.length) {
      throw new Error(`prediction id ${token} outside the ${holds.length} selected holds`);
    }
    if (seen.has(token)) return;
    seen.add(token);
    const [x, y] = holds[token];
    badges.push({ x, y, rank, pad: false });
  });
  return badges;
}

// The user's own ranks for side-by-side display: hold index -> usage rank.
export function userRanks(order: number[] | undefined, nHolds: number): Map<number, number> {
  const ranks = new Map<number, number>();
  if (!order) return ranks;
  order.forEach((holdIndex, rank) => {
    if (holdIndex >= 0 && holdIndex < nHolds && !ranks.has(holdIndex)) {
      ranks.set(holdIndex, rank);
    }
  });
  return ranks;
}
