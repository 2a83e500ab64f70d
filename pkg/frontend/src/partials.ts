// Simulated incremental transcription: typing emits debounced partial
// updates, the send action finalizes the utterance. Sequence numbers
// increase strictly across the whole connection, and nothing is emitted
// between a finalization and the next keystroke.

export interface EmittedAsr {
  type: "asr_partial" | "asr_final";
  text: string;
  seq: number;
  t_ms: number;
}

export interface PartialEmitterOptions {
  debounceMs?: number;
  now?: () => number;
  nextSeq?: () => number;
}

export class PartialEmitter {
  private debounceMs: number;
  private now: () => number;
  private nextSeq: () => number;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private current = "";
  private lastSentPartial = "";
  private internalSeq = 0;

  constructor(
    private send: (message: EmittedAsr) => void,
    options: PartialEmitterOptions = {},
  ) {
    this.debounceMs = options.debounceMs ?? 300;
    this.now = options.now ?? (() => Date.now());
    this.nextSeq = options.nextSeq ?? (() => ++this.internalSeq);
  }

  setDebounce(ms: number): void {
    this.debounceMs = ms;
  }

  /** Call on every input change; one partial fires per typing pause. */
  handleInput(text: string): void {
    this.current = text;
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.timer = setTimeout(() => {
      this.timer = null;
      this.emitPartial();
    }, this.debounceMs);
  }

  /** Send the full utterance as final; empty input sends nothing. */
  finalize(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    const text = this.current.trim();
    this.current = "";
    this.lastSentPartial = "";
    if (!text) {
      return;
    }
    this.send({
      type: "asr_final",
      text,
      seq: this.nextSeq(),
      t_ms: this.now(),
    });
  }

  private emitPartial(): void {
    const text = this.current.trim();
    if (!text || text === this.lastSentPartial) {
      return;
    }
    this.lastSentPartial = text;
    this.send({
      type: "asr_partial",
      text,
      seq: this.nextSeq(),
      t_ms: this.now(),
    });
  }
}
