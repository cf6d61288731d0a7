import { describe, expect, it } from 'vitest';

import { forwardFrames, frameOrigin } from '../src/dh';
import { project, renderScene, type Ctx2D, type View } from '../src/render';
import { SessionState } from '../src/session';
import { ROBOT, stateRaw, welcomeRaw } from './fixtures';

type Call = { op: string; args: unknown[] };

class FakeCtx implements Ctx2D {
  calls: Call[] = [];
  strokeStyle: string | CanvasGradient | CanvasPattern = '';
  fillStyle: string | CanvasGradient | CanvasPattern = '';
  lineWidth = 1;
  globalAlpha = 1;
  font = '';
  private record(op: string, ...args: unknown[]): void {
    this.calls.push({ op, args });
  }
  clearRect(...a: unknown[]) { this.record('clearRect', ...a); }
  beginPath() { this.record('beginPath'); }
  moveTo(...a: unknown[]) { this.record('moveTo', ...a); }
  lineTo(...a: unknown[]) { this.record('lineTo', ...a); }
  arc(...a: unknown[]) { this.record('arc', ...a); }
  stroke() { this.record('stroke'); }
  fill() { this.record('fill'); }
  fillRect(...a: unknown[]) { this.record('fillRect', ...a); }
  strokeRect(...a: unknown[]) { this.record('strokeRect', ...a); }
  fillText(...a: unknown[]) { this.record('fillText', ...a); }
}

const VIEW: View = { width: 900, height: 600, scale: 120 };

function connectedSession(now: () => number = () => 0): SessionState {
  const session = new SessionState({}, now);
  session.attach({ send: () => {} });
  session.handleRaw(welcomeRaw());
  return session;
}

describe('renderScene', () => {
  it('draws the gaze ray ending at the gaze target marker', () => {
    const session = connectedSession();
    session.handleRaw(stateRaw());
    const ctx = new FakeCtx();
    renderScene(ctx, session, VIEW);
    const target = project(VIEW, session.latest!.gaze.pos);
    const hits = ctx.calls.filter(
      (c) =>
        c.op === 'lineTo' &&
        Math.abs((c.args[0] as number) - target[0]) < 1e-9 &&
        Math.abs((c.args[1] as number) - target[1]) < 1e-9,
    );
    expect(hits.length).toBeGreaterThanOrEqual(1);
  });

  it('draws the arm linkage through every joint origin', () => {
    const session = connectedSession();
    session.handleRaw(stateRaw());
    const ctx = new FakeCtx();
    renderScene(ctx, session, VIEW);
    const frames = forwardFrames(ROBOT, session.latest!.q);
    for (const frame of frames.slice(1)) {
      const [x, y] = project(VIEW, frameOrigin(frame));
      const drawn = ctx.calls.some(
        (c) =>
          c.op === 'lineTo' &&
          Math.abs((c.args[0] as number) - x) < 1e-9 &&
          Math.abs((c.args[1] as number) - y) < 1e-9,
      );
      expect(drawn).toBe(true);
    }
  });

  it('different joint angles draw visibly different linkages', () => {
    const session = connectedSession();
    session.handleRaw(stateRaw());
    const a = new FakeCtx();
    renderScene(a, session, VIEW);
    session.handleRaw(stateRaw({ q: [0.6, -0.8, 0.5, -1.8, -1.2, 0.4] }, 3));
    const b = new FakeCtx();
    renderScene(b, session, VIEW);
    const lines = (ctx: FakeCtx) =>
      JSON.stringify(ctx.calls.filter((c) => c.op === 'lineTo'));
    expect(lines(a)).not.toEqual(lines(b));
  });

  it('shows the stale banner when states stop arriving', () => {
    let t = 0;
    const session = connectedSession(() => t);
    session.handleRaw(stateRaw());
    t = 5000;
    const ctx = new FakeCtx();
    renderScene(ctx, session, VIEW);
    const texts = ctx.calls.filter((c) => c.op === 'fillText').map((c) => String(c.args[0]));
    expect(texts.some((s) => s.includes('STALE'))).toBe(true);
  });

  it('renders hand badges only for raised hands', () => {
    const session = connectedSession();
    session.handleRaw(stateRaw());
    const ctx = new FakeCtx();
    renderScene(ctx, session, VIEW);
    const [px, py] = project(VIEW, session.latest!.persons[0].pos);
    const badge = (dx: number) =>
      ctx.calls.some(
        (c) =>
          c.op === 'arc' &&
          Math.abs((c.args[0] as number) - (px + dx)) < 1e-9 &&
          Math.abs((c.args[1] as number) - (py - 12)) < 1e-9,
      );
    expect(badge(12)).toBe(true); // right hand raised in fixture
    expect(badge(-12)).toBe(false); // left hand down
  });

  it('waits gracefully before the first state', () => {
    const session = connectedSession();
    const ctx = new FakeCtx();
    renderScene(ctx, session, VIEW);
    const texts = ctx.calls.filter((c) => c.op === 'fillText').map((c) => String(c.args[0]));
    expect(texts.some((s) => s.includes('waiting'))).toBe(true);
  });
});

describe('side inset and warnings', () => {
  it('draws the side-view linkage and it tracks posture changes', () => {
    const session = connectedSession();
    session.handleRaw(stateRaw());
    const a = new FakeCtx();
    renderScene(a, session, VIEW);
    const labels = a.calls.filter((c) => c.op === 'fillText').map((c) => String(c.args[0]));
    expect(labels.some((s) => s.includes('side view'))).toBe(true);
    session.handleRaw(stateRaw({ q: [0, -1.6, 1.5, -1.47, -1.57, 0] }, 4));
    const b = new FakeCtx();
    renderScene(b, session, VIEW);
    const lines = (ctx: FakeCtx) => JSON.stringify(ctx.calls.filter((c) => c.op === 'lineTo'));
    expect(lines(a)).not.toEqual(lines(b));
  });

  it('surfaces commands unanswered for over a second', () => {
    let t = 0;
    const session = connectedSession(() => t);
    session.handleRaw(stateRaw());
    session.send({ op: 'set_arousal', level: 8 });
    t = 400; // keep the view fresh but the command aging
    session.handleRaw(stateRaw({}, 5));
    t = 1500;
    session.handleRaw(stateRaw({}, 6));
    const ctx = new FakeCtx();
    renderScene(ctx, session, VIEW);
    const texts = ctx.calls.filter((c) => c.op === 'fillText').map((c) => String(c.args[0]));
    expect(texts.some((s) => s.includes('no reply for') && s.includes('set_arousal'))).toBe(true);
  });
});
