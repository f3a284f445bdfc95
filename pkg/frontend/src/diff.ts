/**
 * Line diff between two step texts.
 *
 * Classic LCS table; step snapshots are small programs so the quadratic
 * table is never a concern. Lines are compared whole.
 */

export type DiffKind = "same" | "add" | "del";

export interface DiffLine {
    kind: DiffKind;
    line: string;
}

function splitLines(text: string): string[] {
    if (text === "") {
        return [];
    }
    return text.split("\n");
}

/** Diff of before -> after, as a flat list of kept, added and removed lines. */
export function diffLines(before: string, after: string): DiffLine[] {
    const a = splitLines(before);
    const b = splitLines(after);
    const rows = a.length + 1;
    const cols = b.length + 1;
    const lcs: number[] = new Array(rows * cols).fill(0);

    for (let i = a.length - 1; i >= 0; i--) {
        for (let j = b.length - 1; j >= 0; j--) {
            if (a[i] === b[j]) {
                lcs[i * cols + j] = lcs[(i + 1) * cols + j + 1] + 1;
            } else {
                lcs[i * cols + j] = Math.max(
                    lcs[(i + 1) * cols + j],
                    lcs[i * cols + j + 1],
                );
            }
        }
    }

    const out: DiffLine[] = [];
    let i = 0;
    let j = 0;
    while (i < a.length && j < b.length) {
        if (a[i] === b[j]) {
            out.push({ kind: "same", line: a[i] });
            i++;
            j++;
        } else if (lcs[(i + 1) * cols + j] >= lcs[i * cols + j + 1]) {
            out.push({ kind: "del", line: a[i] });
            i++;
        } else {
            out.push({ kind: "add", line: b[j] });
            j++;
        }
    }
    for (; i < a.length; i++) {
        out.push({ kind: "del", line: a[i] });
    }
    for (; j < b.length; j++) {
        out.push({ kind: "add", line: b[j] });
    }
    return out;
}

/** True when the diff contains any added or removed line. */
export function hasChanges(lines: DiffLine[]): boolean {
    return lines.some((l) => l.kind !== "same");
}
