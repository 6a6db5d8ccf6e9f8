/**
 * DOM view for a detector session.  Renders the machine, the three objects,
 * the check button, and phase-appropriate controls; all interaction is
 * forwarded to a SessionClient and the view re-renders from its state.
 */

import { ObjectLabel } from "./protocol.js";
import { SessionClient, SessionView } from "./session.js";

const OBJECTS: ObjectLabel[] = ["A", "B", "C"];

export interface VisualConfig {
  /** CSS class per machine appearance, e.g. {"polka-dot": "machine-dots"}. */
  machineClasses: Record<string, string>;
  objectColors: Record<ObjectLabel, string>;
}

export const DEFAULT_VISUALS: VisualConfig = {
  machineClasses: {
    "polka-dot": "machine-dots",
    striped: "machine-stripes",
    plain: "machine-plain",
  },
  objectColors: { A: "crimson", B: "royalblue", C: "goldenrod" },
};

export class SessionUI {
  private root: HTMLElement;
  private client: SessionClient;
  private visuals: VisualConfig;

  constructor(root: HTMLElement, client: SessionClient, visuals: VisualConfig = DEFAULT_VISUALS) {
    this.root = root;
    this.client = client;
    this.visuals = visuals;
    client.subscribe((view) => this.render(view));
    this.render(client.view());
  }

  render(view: SessionView): void {
    this.root.innerHTML = "";
    this.root.appendChild(this.machine(view));
    this.root.appendChild(this.tray(view));
    this.root.appendChild(this.controls(view));
    if (view.lastError !== null) {
      const err = this.el("div", "error-banner");
      err.textContent = view.lastError;
      this.root.appendChild(err);
    }
  }

  private machine(view: SessionView): HTMLElement {
    const box = this.el("div", "machine");
    const demo = view.phase === "demo" ? view.demos[view.demoIndex] : undefined;
    const appearance = demo?.machine ?? "plain";
    box.classList.add(this.visuals.machineClasses[appearance] ?? "machine-plain");

    const light = this.el("div", "light");
    light.classList.add(`light-${view.light}`);
    light.setAttribute("data-light", view.light);
    box.appendChild(light);

    const surface = this.el("div", "surface");
    for (const object of view.placed) {
      surface.appendChild(this.objectEl(object, true));
    }
    box.appendChild(surface);
    return box;
  }

  private tray(view: SessionView): HTMLElement {
    const tray = this.el("div", "tray");
    for (const object of OBJECTS) {
      if (!view.placed.includes(object)) {
        tray.appendChild(this.objectEl(object, false));
      }
    }
    return tray;
  }

  private controls(view: SessionView): HTMLElement {
    const bar = this.el("div", "controls");
    switch (view.phase) {
      case "demo": {
        const next = this.button("next-demo", "Next demonstration");
        next.addEventListener("click", () => this.client.nextDemo());
        bar.appendChild(next);
        break;
      }
      case "explore": {
        const check = this.button("check", "Check");
        check.addEventListener("click", () => this.client.check());
        bar.appendChild(check);
        const done = this.button("begin-test", "I'm done exploring");
        done.addEventListener("click", () => this.client.beginTest());
        bar.appendChild(done);
        break;
      }
      case "test": {
        const label = this.el("div", "question");
        label.textContent =
          view.pendingQuestion === "blickets"
            ? "Which objects are blickets?"
            : "Which objects would you place to turn the machine on?";
        bar.appendChild(label);
        break;
      }
      case "done": {
        const label = this.el("div", "finished");
        label.textContent = "Session complete";
        bar.appendChild(label);
        break;
      }
    }
    return bar;
  }

  private objectEl(object: ObjectLabel, placed: boolean): HTMLElement {
    const el = this.el("div", "object");
    el.classList.add(placed ? "placed" : "in-tray");
    el.setAttribute("data-object", object);
    el.style.backgroundColor = this.visuals.objectColors[object];
    el.textContent = object;
    el.addEventListener("click", () => this.client.toggle(object));
    return el;
  }

  private button(id: string, text: string): HTMLButtonElement {
    const btn = this.root.ownerDocument.createElement("button");
    btn.id = id;
    btn.textContent = text;
    return btn;
  }

  private el(tag: string, className: string): HTMLElement {
    const el = this.root.ownerDocument.createElement(tag);
    el.className = className;
    return el;
  }
}
