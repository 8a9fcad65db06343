/** Stroke capture state machine, independent of the DOM.
 *
 * The UI feeds pointer samples (already converted to canvas
 * coordinates) into a StrokeRecorder; on pointer-up the recorder
 * finalizes a PadStroke or discards it when it holds fewer than two
 * points. Completed strokes are never mutated afterwards.
 */

export interface PadPoint {
  x: number;
  y: number;
  t: number;
}

export interface PadStroke {
  points: PadPoint[];
}

export type StrokeListener = (stroke: PadStroke) => void;

export class StrokeRecorder {
  private current: PadPoint[] | null = null;
  private listeners: StrokeListener[] = [];

  onStroke(listener: StrokeListener): void {
    this.listeners.push(listener);
  }

  get drawing(): boolean {
    return this.current !== null;
  }

  /** Points of the in-progress stroke, for live rendering. */
  get pending(): readonly PadPoint[] {
    return this.current ?? [];
  }

  down(x: number, y: number, t: number): void {
    this.current = [{ x, y, t }];
  }

  /** Pointer move; ignored unless a stroke is in progress. Consecutive
   * samples at the same position are collapsed. */
  move(x: number, y: number, t: number): void {
    if (this.current === null) {
      return;
    }
    const last = this.current[this.current.length - 1];
    if (last.x === x && last.y === y) {
      return;
    }
    if (t < last.t) {
      t = last.t; // clock went backwards; keep points ordered
    }
    this.current.push({ x, y, t });
  }

  /** Pointer up: finalize. Strokes with < 2 points are discarded
   * silently. Returns the finalized stroke, or null when discarded or
   * no stroke was in progress. */
  up(x: number, y: number, t: number): PadStroke | null {
    if (this.current === null) {
      return null;
    }
    this.move(x, y, t);
    const points = this.current;
    this.current = null;
    if (points.length < 2) {
      return null;
    }
    const stroke: PadStroke = { points };
    for (const listener of this.listeners) {
      listener(stroke);
    }
    return stroke;
  }

  /** Abandon the in-progress stroke (canvas reset, pointer cancel). */
  cancel(): void {
    this.current = null;
  }
}

/** Serialize a stroke the way the service expects: [x, y, t] arrays. */
export function strokeToPoints(stroke: PadStroke): number[][] {
  return stroke.points.map((p) => [p.x, p.y, Math.round(p.t)]);
}
