import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { type EmittedAsr, PartialEmitter } from "../src/partials.js";

describe("PartialEmitter", () => {
  let sent: EmittedAsr[];
  let clock: number;
  let emitter: PartialEmitter;

  beforeEach(() => {
    vi.useFakeTimers();
    sent = [];
    clock = 0;
    emitter = new PartialEmitter((message) => sent.push(message), {
      debounceMs: 300,
      now: () => clock,
    });
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  function advance(ms: number): void {
    clock += ms;
    vi.advanceTimersByTime(ms);
  }

  it("produces the pinned sequence for a scripted typing timeline", () => {
    emitter.handleInput("Hel");
    advance(100); // still typing, no partial yet
    emitter.handleInput("Hello");
    advance(300); // pause -> partial fires
    emitter.handleInput("Hello there");
    advance(120);
    emitter.handleInput("Hello there friend");
    advance(300); // second pause -> second partial
    clock += 80;
    emitter.finalize();
    advance(1000); // nothing more after finalization

    expect(sent).toEqual([
      { type: "asr_partial", text: "Hello", seq: 1, t_ms: 400 },
      { type: "asr_partial", text: "Hello there friend", seq: 2, t_ms: 820 },
      { type: "asr_final", text: "Hello there friend", seq: 3, t_ms: 900 },
    ]);
  });

  it("emits exactly one partial per pause", () => {
    emitter.handleInput("a");
    advance(300);
    advance(900);
    expect(sent).toHaveLength(1);
  });

  it("does not repeat an unchanged partial", () => {
    emitter.handleInput("same words");
    advance(300);
    emitter.handleInput("same words");
    advance(300);
    expect(sent).toHaveLength(1);
  });

  it("sends nothing for an empty box", () => {
    emitter.finalize();
    emitter.handleInput("   ");
    advance(500);
    emitter.finalize();
    expect(sent).toEqual([]);
  });

  it("stays silent between finalization and the next keystroke", () => {
    emitter.handleInput("first thought");
    advance(300);
    emitter.finalize();
    advance(2000);
    expect(sent.map((m) => m.type)).toEqual(["asr_partial", "asr_final"]);
    emitter.handleInput("second thought");
    advance(300);
    expect(sent).toHaveLength(3);
  });

  it("keeps sequence numbers strictly increasing across utterances", () => {
    emitter.handleInput("one");
    advance(300);
    emitter.finalize();
    emitter.handleInput("two");
    advance(300);
    emitter.finalize();
    const seqs = sent.map((m) => m.seq);
    expect(seqs).toEqual([...seqs].sort((a, b) => a - b));
    expect(new Set(seqs).size).toBe(seqs.length);
  });

  it("a trailing pause after finalize does not resend the utterance", () => {
    emitter.handleInput("hello city");
    emitter.finalize(); // finalize before the debounce window closes
    advance(400);
    expect(sent).toEqual([
      { type: "asr_final", text: "hello city", seq: 1, t_ms: 0 },
    ]);
  });

  it("respects a changed debounce setting", () => {
    emitter.setDebounce(100);
    emitter.handleInput("quick");
    advance(100);
    expect(sent).toHaveLength(1);
  });
});
