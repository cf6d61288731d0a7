// Client-side session state: connection lifecycle, the latest StateTick,
// pending-command tracking, and staleness detection. Pure logic; the
// actual WebSocket is injected so tests can drive it with a fake.

import {
  encodeCommand,
  encodeHello,
  parseServerMessage,
  PROTOCOL_VERSION,
  type ClientCommand,
  type RobotInfo,
  type StateTick,
} from './protocol';

export type ConnectionStatus = 'connecting' | 'handshaking' | 'connected' | 'closed';

export interface Pending {
  seq: number;
  op: string;
  sentAt: number; // ms
}

export interface SessionEvents {
  onState?: (tick: StateTick) => void;
  onError?: (message: string, field: string | null) => void;
  onStatus?: (status: ConnectionStatus) => void;
}

export const STALE_AFTER_MS = 1000;
export const PENDING_WARN_MS = 1000;

export interface Wire {
  send(data: string): void;
}

export class SessionState {
  status: ConnectionStatus = 'connecting';
  latest: StateTick | null = null;
  latestAt = 0;
  robot: RobotInfo | null = null;
  dt = 1 / 30;
  selectedPersonId: number | null = null;
  readonly pending = new Map<number, Pending>();

  private seq = 0;
  private wire: Wire | null = null;
  private events: SessionEvents;
  private now: () => number;

  constructor(events: SessionEvents = {}, now: () => number = () => Date.now()) {
    this.events = events;
    this.now = now;
  }

  attach(wire: Wire): void {
    this.wire = wire;
    this.status = 'handshaking';
    this.events.onStatus?.(this.status);
    wire.send(encodeHello(this.nextSeq()));
  }

  detach(): void {
    this.wire = null;
    this.status = 'closed';
    this.events.onStatus?.(this.status);
  }

  nextSeq(): number {
    return ++this.seq;
  }

  /** Fresh person id: above every id the server currently reports. */
  allocPersonId(): number {
    const known = this.latest?.persons.map((p) => p.id) ?? [];
    return known.length === 0 ? 1 : Math.max(...known) + 1;
  }

  handleRaw(raw: string): void {
    let msg;
    try {
      msg = parseServerMessage(raw);
    } catch (err) {
      this.events.onError?.(`unparseable server message: ${err}`, null);
      return;
    }
    switch (msg.type) {
      case 'welcome':
        if (msg.payload.version !== PROTOCOL_VERSION) {
          this.events.onError?.(`server speaks version ${msg.payload.version}`, 'version');
          return;
        }
        this.robot = msg.payload.robot;
        this.dt = msg.payload.dt;
        this.status = 'connected';
        this.events.onStatus?.(this.status);
        break;
      case 'state':
        this.latest = msg.payload;
        this.latestAt = this.now();
        if (
          this.selectedPersonId !== null &&
          !msg.payload.persons.some((p) => p.id === this.selectedPersonId)
        ) {
          this.selectedPersonId = null;
        }
        this.events.onState?.(msg.payload);
        break;
      case 'ack':
        this.pending.delete(msg.seq);
        break;
      case 'error':
        this.pending.delete(msg.seq);
        this.events.onError?.(msg.payload.message, msg.payload.field);
        break;
    }
  }

  /** Send a command; returns its seq, or null when not connected. */
  send(command: ClientCommand): number | null {
    if (this.status !== 'connected' || this.wire === null) {
      return null;
    }
    const seq = this.nextSeq();
    this.pending.set(seq, { seq, op: command.op, sentAt: this.now() });
    this.wire.send(encodeCommand(seq, command));
    return seq;
  }

  isStale(): boolean {
    if (this.status !== 'connected') return true;
    return this.now() - this.latestAt > STALE_AFTER_MS;
  }

  /** Commands sent > 1 s ago with no ack/error reply yet. */
  pendingWarnings(): Pending[] {
    const cutoff = this.now() - PENDING_WARN_MS;
    return [...this.pending.values()].filter((p) => p.sentAt < cutoff);
  }
}
