/**
 * Transport over a raw TCP socket (Node only); the browser build uses a
 * different Transport and never imports this module.
 */

import * as net from "node:net";
import { ClientMessage, LineDecoder, ServerMessage, Transport, encodeMessage } from "./protocol.js";

export class TcpTransport implements Transport {
  private socket: net.Socket;
  private decoder = new LineDecoder();
  private handlers: Array<(message: ServerMessage) => void> = [];

  private constructor(socket: net.Socket) {
    this.socket = socket;
    socket.setEncoding("utf8");
    socket.on("data", (chunk: string) => {
      for (const message of this.decoder.feed(chunk)) {
        for (const handler of this.handlers) {
          handler(message);
        }
      }
    });
  }

  static connect(host: string, port: number): Promise<TcpTransport> {
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host, port });
      socket.once("error", reject);
      socket.once("connect", () => {
        socket.removeListener("error", reject);
        resolve(new TcpTransport(socket));
      });
    });
  }

  send(message: ClientMessage): void {
    this.socket.write(encodeMessage(message));
  }

  onMessage(handler: (message: ServerMessage) => void): void {
    this.handlers.push(handler);
  }

  close(): void {
    this.socket.end();
  }
}
