/** DOM wiring: connects the panel widgets to the control socket. */

import { drawGauge } from "./gauge.js";
import { PanelModel } from "./model.js";
import { commands, parseServerMessage } from "./protocol.js";
import { HoldRepeater } from "./repeater.js";
import { ControlSocket } from "./ws.js";

const GAUGE_SIZE = 320;
const ACCELERATE_REPEAT_HZ = 10;

function byId<T extends HTMLElement>(id: string): T {
  const element = document.getElementById(id);
  if (!element) throw new Error(`missing element #${id}`);
  return element as T;
}

const model = new PanelModel();

const canvas = byId<HTMLCanvasElement>("gauge");
canvas.width = GAUGE_SIZE;
canvas.height = GAUGE_SIZE;
const ctx = canvas.getContext("2d");
if (!ctx) throw new Error("canvas 2d context unavailable");

const connectionDot = byId<HTMLSpanElement>("connection");
const controls = byId<HTMLFieldSetElement>("controls");
const attackForm = byId<HTMLFieldSetElement>("attack-controls");
const attackStatus = byId<HTMLSpanElement>("attack-status");
const errorLine = byId<HTMLDivElement>("error-line");
const rowsBody = byId<HTMLTableSectionElement>("rows-body");
const feedBody = byId<HTMLTableSectionElement>("feed-body");
const blinkerLeft = byId<HTMLSpanElement>("blinker-left");
const blinkerRight = byId<HTMLSpanElement>("blinker-right");
const doorButtons = [0, 1, 2, 3].map((i) => byId<HTMLButtonElement>(`door-${i}`));

const socket = new ControlSocket(
  `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`,
  {
    onOpen() {
      model.reset();
      model.setConnected(true);
      render();
    },
    onMessage(text) {
      const message = parseServerMessage(text);
      if (message) {
        model.apply(message);
        scheduleRender();
      }
    },
    onClose() {
      model.setConnected(false);
      render();
    },
  },
);

let renderQueued = false;
function scheduleRender(): void {
  if (renderQueued) return;
  renderQueued = true;
  requestAnimationFrame(() => {
    renderQueued = false;
    render();
  });
}

function render(): void {
  drawGauge(ctx!, model.vehicle.speedMph, GAUGE_SIZE);
  connectionDot.classList.toggle("online", model.connected);
  connectionDot.title = model.connected ? "connected" : "disconnected";
  controls.disabled = !model.connected;
  attackForm.disabled = !model.connected;

  blinkerLeft.classList.toggle("blinking", model.vehicle.blinkerLeft);
  blinkerRight.classList.toggle("blinking", model.vehicle.blinkerRight);
  model.vehicle.doors.forEach((locked, i) => {
    doorButtons[i].classList.toggle("locked", locked);
    doorButtons[i].textContent = `Door ${i + 1} ${locked ? "🔒" : "🔓"}`;
  });

  attackStatus.textContent = model.attack.message
    ? `${model.attack.message} (${model.attack.framesSent} frames)`
    : "idle";
  attackStatus.classList.toggle("running", model.attack.running);
  errorLine.textContent = model.lastError ?? "";

  renderRows();
  renderFeed();
}

function renderRows(): void {
  const rows = model.sortedRows();
  rowsBody.replaceChildren(
    ...rows.map((row) => {
      const tr = document.createElement("tr");
      tr.append(
        cell(row.timestamp.toFixed(6)),
        cell(row.intervalMs === null ? "" : row.intervalMs.toFixed(1)),
        cell(row.id),
        cell(String(row.dlc)),
        cell(row.data),
      );
      return tr;
    }),
  );
}

function renderFeed(): void {
  feedBody.replaceChildren(
    ...model.feed.slice(0, 40).map((entry) => {
      const tr = document.createElement("tr");
      tr.append(
        cell(entry.ts.toFixed(6)),
        cell(entry.id),
        cell(String(entry.dlc)),
        cell(entry.data),
      );
      return tr;
    }),
  );
}

function cell(text: string): HTMLTableCellElement {
  const td = document.createElement("td");
  td.textContent = text;
  return td;
}

function send(payload: string): void {
  socket.send(payload);
}

// --- control wiring: every command needs a user gesture -------------------

const accelerate = new HoldRepeater(
  () => send(commands.accelerate()),
  ACCELERATE_REPEAT_HZ,
);
const accelerateButton = byId<HTMLButtonElement>("accelerate");
accelerateButton.addEventListener("pointerdown", () => accelerate.press());
for (const kind of ["pointerup", "pointerleave", "pointercancel"] as const) {
  accelerateButton.addEventListener(kind, () => accelerate.release());
}

doorButtons.forEach((button, index) => {
  button.addEventListener("click", () => send(commands.door(index)));
});

byId<HTMLInputElement>("blinker-left-switch").addEventListener("change", (event) => {
  send(commands.blinker("left", (event.target as HTMLInputElement).checked));
});
byId<HTMLInputElement>("blinker-right-switch").addEventListener("change", (event) => {
  send(commands.blinker("right", (event.target as HTMLInputElement).checked));
});

byId<HTMLButtonElement>("attack-start").addEventListener("click", () => {
  send(
    commands.attackStart({
      filemap: byId<HTMLInputElement>("attack-filemap").value,
      rate: Number(byId<HTMLInputElement>("attack-rate").value) || 100,
      seed: Number(byId<HTMLInputElement>("attack-seed").value) || 0,
      outOfRange: Number(byId<HTMLInputElement>("attack-oor").value) || 0.3,
    }),
  );
});
byId<HTMLButtonElement>("attack-stop").addEventListener("click", () => {
  send(commands.attackStop());
});

render();
socket.connect();
