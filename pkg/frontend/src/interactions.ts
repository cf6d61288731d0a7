// Pointer/keyboard interactions mapped to protocol commands.
// Drags are throttled to the server tick rate; interactions while
// disconnected are dropped and reported via the notice callback.

import type { SessionState } from './session';
import type { Vec3 } from './protocol';

export class InteractionController {
  private session: SessionState;
  private lastMoveAt = new Map<number, number>();
  private notice: (text: string) => void;
  private now: () => number;

  constructor(
    session: SessionState,
    notice: (text: string) => void = () => {},
    now: () => number = () => Date.now(),
  ) {
    this.session = session;
    this.notice = notice;
    this.now = now;
  }

  private guard(): boolean {
    if (this.session.status !== 'connected') {
      this.notice('not connected; interaction dropped');
      return false;
    }
    return true;
  }

  /** Double-click on empty floor: spawn a person with a fresh id. */
  spawnAt(pos: Vec3): number | null {
    if (!this.guard()) return null;
    const id = this.session.allocPersonId();
    this.session.send({ op: 'spawn_person', id, pos });
    this.session.selectedPersonId = id;
    return id;
  }

  /** Drag stream: at most one move_person per tick interval per person. */
  dragTo(personId: number, pos: Vec3): boolean {
    if (!this.guard()) return false;
    const tickMs = this.session.dt * 1000;
    const last = this.lastMoveAt.get(personId) ?? -Infinity;
    const now = this.now();
    if (now - last < tickMs) return false;
    this.lastMoveAt.set(personId, now);
    this.session.send({ op: 'move_person', id: personId, pos });
    return true;
  }

  /** Key on the current selection toggles one hand. */
  toggleHand(hand: 'left' | 'right'): boolean {
    if (!this.guard()) return false;
    const id = this.session.selectedPersonId;
    if (id === null) return false;
    const person = this.session.latest?.persons.find((p) => p.id === id);
    const raised = hand === 'left' ? person?.h_left === 1 : person?.h_right === 1;
    this.session.send({ op: 'set_hand', id, hand, raised: !raised });
    return true;
  }

  removeSelected(): boolean {
    if (!this.guard()) return false;
    const id = this.session.selectedPersonId;
    if (id === null) return false;
    this.session.send({ op: 'remove_person', id });
    this.session.selectedPersonId = null;
    return true;
  }

  setArousal(level: number): boolean {
    if (!this.guard()) return false;
    this.session.send({ op: 'set_arousal', level });
    return true;
  }

  setAttention(mode: 'low' | 'high'): boolean {
    if (!this.guard()) return false;
    this.session.send({ op: 'set_attention', mode });
    return true;
  }
}
