// Clip playback: frame timing, play/pause/scrub, and coordinate scaling.
// Pure state machine; main.ts owns the render loop.

export interface ClipJson {
  fps: number;
  frames: { landmarks: number[][] }[];
}

export function parseClip(json: unknown): ClipJson {
  const obj = json as ClipJson;
  if (typeof obj?.fps !== "number" || !Array.isArray(obj?.frames)) {
    throw new Error("clip JSON needs numeric fps and a frames array");
  }
  obj.frames.forEach((frame, i) => {
    if (!Array.isArray(frame.landmarks) || frame.landmarks.length !== 33) {
      throw new Error(`clip frame ${i}: expected 33 landmarks`);
    }
  });
  return obj;
}

export function scaleLandmarks(
  frame: { landmarks: number[][] },
  width: number,
  height: number
): [number, number][] {
  return frame.landmarks.map(([x, y]) => [x * width, y * height]);
}

export class ClipPlayer {
  readonly clip: ClipJson;
  playing = false;
  private timeSeconds = 0;

  constructor(clip: ClipJson) {
    this.clip = parseClip(clip);
  }

  get frameCount(): number {
    return this.clip.frames.length;
  }

  get durationSeconds(): number {
    return this.frameCount / this.clip.fps;
  }

  get currentFrame(): number {
    const idx = Math.floor(this.timeSeconds * this.clip.fps);
    return Math.min(this.frameCount - 1, Math.max(0, idx));
  }

  play(): void {
    if (this.frameCount > 0) this.playing = true;
  }

  pause(): void {
    this.playing = false;
  }

  // Jump straight to a frame index (the scrubber).
  scrubTo(frame: number): void {
    const clamped = Math.min(this.frameCount - 1, Math.max(0, Math.floor(frame)));
    this.timeSeconds = clamped / this.clip.fps;
  }

  // Advance by wall-clock delta; loops at the end.
  tick(dtSeconds: number): void {
    if (!this.playing) return;
    this.timeSeconds += dtSeconds;
    if (this.timeSeconds >= this.durationSeconds) {
      this.timeSeconds = this.timeSeconds % this.durationSeconds;
    }
  }

  frameLandmarks(width: number, height: number): [number, number][] {
    return scaleLandmarks(this.clip.frames[this.currentFrame], width, height);
  }
}

// Shared skeleton edge list (33-landmark topology), mirrored from the backend.
export const SKELETON_EDGES: [number, number][] = [
  [0, 1], [1, 2], [2, 3], [3, 7],
  [0, 4], [4, 5], [5, 6], [6, 8],
  [9, 10],
  [11, 12], [11, 13], [13, 15], [15, 17], [15, 19], [15, 21], [17, 19],
  [12, 14], [14, 16], [16, 18], [16, 20], [16, 22], [18, 20],
  [11, 23], [12, 24], [23, 24],
  [23, 25], [25, 27], [27, 29], [29, 31], [27, 31],
  [24, 26], [26, 28], [28, 30], [30, 32], [28, 32],
];
