/**
 * Step references inside a generated response.
 *
 * The pattern matches the service's own checker: the word "step", optional
 * separator run, then digits. "step12" is one fused token and never matches;
 * "steps 1 and 3" names no single step and never matches.
 */

const STEP_REF = /\bstep\b[\s:#-]*(\d+)/gi;

/** Step numbers in order of appearance, duplicates preserved. */
export function referencedSteps(text: string): number[] {
    const refs: number[] = [];
    for (const match of text.matchAll(STEP_REF)) {
        refs.push(parseInt(match[1], 10));
    }
    return refs;
}

/** References that name no real step in a sequence of stepCount steps. */
export function invalidSteps(refs: number[], stepCount: number): number[] {
    return refs.filter((r) => r < 1 || r > stepCount);
}

export interface StepRefCheck {
    referenced: number[];
    invalid: number[];
}

/** One-shot check of a response against the step count it was built from. */
export function checkStepRefs(text: string, stepCount: number): StepRefCheck {
    const referenced = referencedSteps(text);
    return { referenced, invalid: invalidSteps(referenced, stepCount) };
}
