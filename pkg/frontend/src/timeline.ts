/**
 * Timeline model for one snapshot sequence.
 *
 * Markers are kept exactly as the service sent them; scrubbing just moves a
 * selection index over that list.
 */

import type { SnapshotMarker, SnapshotSequenceDto } from "./types.js";

export class Timeline {
    readonly session: string;
    readonly thresholdMs: number;
    readonly markers: SnapshotMarker[];
    private selected: number;

    constructor(sequence: SnapshotSequenceDto) {
        if (sequence.snapshots.length === 0) {
            throw new Error("snapshot sequence has no markers");
        }
        this.session = sequence.session;
        this.thresholdMs = sequence.threshold_ms;
        this.markers = sequence.snapshots.slice();
        this.selected = 0;
    }

    get stepCount(): number {
        return this.markers.length;
    }

    get selectedIndex(): number {
        return this.selected;
    }

    /** Marker currently under the scrubber. */
    get selectedMarker(): SnapshotMarker {
        return this.markers[this.selected];
    }

    get finalIndex(): number {
        return this.markers.length - 1;
    }

    isFinalSelected(): boolean {
        return this.selected === this.finalIndex;
    }

    /** Move the scrubber; out-of-range indices clamp to the ends. */
    select(index: number): SnapshotMarker {
        const clamped = Math.min(Math.max(index, 0), this.finalIndex);
        this.selected = clamped;
        return this.markers[clamped];
    }

    selectFinal(): SnapshotMarker {
        return this.select(this.finalIndex);
    }

    /**
     * Horizontal position of each marker as a 0..1 fraction of the session
     * span. A single-marker session pins its marker to 0.
     */
    positions(): number[] {
        const first = this.markers[0].ts_ms;
        const last = this.markers[this.markers.length - 1].ts_ms;
        const span = last - first;
        if (span <= 0) {
            return this.markers.map(() => 0);
        }
        return this.markers.map((m) => (m.ts_ms - first) / span);
    }

    /** Text of the step before the selected one, empty at the first step. */
    previousText(): string {
        if (this.selected === 0) {
            return "";
        }
        return this.markers[this.selected - 1].text;
    }
}
