// Transport abstraction. The browser uses WebSocketTransport; tests plug a
// raw TCP transport behind the same interface. Payload bytes are identical
// wire frames either way.

export interface Transport {
  send(frame: Uint8Array): void;
  close(): void;
  onData: ((chunk: Uint8Array) => void) | null;
  onClose: ((reason: string) => void) | null;
}

export class ConnectionRefused extends Error {}

export function connectWebSocket(url: string): Promise<Transport> {
  return new Promise((resolve, reject) => {
    let socket: WebSocket;
    try {
      socket = new WebSocket(url);
    } catch (err) {
      reject(new ConnectionRefused(String(err)));
      return;
    }
    socket.binaryType = "arraybuffer";
    const transport: Transport = {
      onData: null,
      onClose: null,
      send(frame: Uint8Array) {
        socket.send(frame);
      },
      close() {
        socket.close();
      },
    };
    socket.onopen = () => resolve(transport);
    socket.onerror = () => reject(new ConnectionRefused(`cannot reach ${url}`));
    socket.onmessage = (event: MessageEvent) => {
      if (transport.onData && event.data instanceof ArrayBuffer) {
        transport.onData(new Uint8Array(event.data));
      }
    };
    socket.onclose = (event: CloseEvent) => {
      if (transport.onClose) transport.onClose(`closed (${event.code})`);
    };
  });
}
