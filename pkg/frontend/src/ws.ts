/** WebSocket wrapper with automatic reconnect. */

export interface SocketHandlers {
  onOpen(): void;
  onMessage(text: string): void;
  onClose(): void;
}

export class ControlSocket {
  private ws: WebSocket | null = null;
  private shouldReconnect = true;

  constructor(
    private readonly url: string,
    private readonly handlers: SocketHandlers,
    private readonly reconnectDelayMs = 1000,
  ) {}

  connect(): void {
    if (this.ws) return;
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => this.handlers.onOpen();
    ws.onmessage = (event) => this.handlers.onMessage(String(event.data));
    ws.onclose = () => {
      this.ws = null;
      this.handlers.onClose();
      if (this.shouldReconnect) {
        setTimeout(() => this.connect(), this.reconnectDelayMs);
      }
    };
    ws.onerror = () => ws.close();
  }

  send(payload: string): boolean {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(payload);
      return true;
    }
    return false;
  }

  close(): void {
    this.shouldReconnect = false;
    this.ws?.close();
  }
}
