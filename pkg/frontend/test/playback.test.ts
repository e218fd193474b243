import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { ClipPlayer, parseClip, scaleLandmarks } from "../src/playback.js";

const clipJson = JSON.parse(
  readFileSync(new URL("../fixtures/clip.json", import.meta.url), "utf8")
);

describe("clip parsing", () => {
  it("accepts the recorded backend clip", () => {
    const clip = parseClip(clipJson);
    expect(clip.fps).toBe(30);
    expect(clip.frames.length).toBeGreaterThan(0);
  });

  it("rejects frames without 33 landmarks", () => {
    expect(() => parseClip({ fps: 30, frames: [{ landmarks: [[0, 0]] }] })).toThrow("33");
    expect(() => parseClip({ frames: [] })).toThrow("fps");
  });
});

describe("playback", () => {
  it("frame 0 matches the clip after coordinate scaling", () => {
    const player = new ClipPlayer(clipJson);
    const pts = player.frameLandmarks(330, 540);
    clipJson.frames[0].landmarks.forEach(([x, y]: [number, number], i: number) => {
      expect(pts[i][0]).toBeCloseTo(x * 330, 12);
      expect(pts[i][1]).toBeCloseTo(y * 540, 12);
    });
  });

  it("scrub to the last frame shows the final pose", () => {
    const player = new ClipPlayer(clipJson);
    const last = player.frameCount - 1;
    player.scrubTo(last);
    expect(player.currentFrame).toBe(last);
    const pts = player.frameLandmarks(100, 100);
    const expected = scaleLandmarks(clipJson.frames[last], 100, 100);
    expect(pts).toEqual(expected);
  });

  it("scrub clamps to the frame range", () => {
    const player = new ClipPlayer(clipJson);
    player.scrubTo(10_000);
    expect(player.currentFrame).toBe(player.frameCount - 1);
    player.scrubTo(-5);
    expect(player.currentFrame).toBe(0);
  });

  it("playback duration is frames/fps within one frame", () => {
    const player = new ClipPlayer(clipJson);
    const expected = player.frameCount / clipJson.fps;
    expect(Math.abs(player.durationSeconds - expected)).toBeLessThanOrEqual(1 / clipJson.fps);
  });

  it("tick advances only while playing and loops", () => {
    const player = new ClipPlayer(clipJson);
    player.tick(1.0);
    expect(player.currentFrame).toBe(0); // paused
    player.play();
    player.tick(2 / clipJson.fps);
    expect(player.currentFrame).toBe(2);
    player.tick(player.durationSeconds); // wraps
    expect(player.currentFrame).toBeLessThan(player.frameCount);
    player.pause();
    const frozen = player.currentFrame;
    player.tick(1.0);
    expect(player.currentFrame).toBe(frozen);
  });
});
