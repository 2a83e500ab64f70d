import { EngineClient } from "./client.js";
import { PartialEmitter } from "./partials.js";
import { ConsoleView } from "./view.js";

const root = document.getElementById("app") as HTMLElement;
const view = new ConsoleView(root);

const controls = document.createElement("div");
controls.className = "controls";
controls.innerHTML = `
  <textarea class="say" rows="2"
    placeholder="Type to speak (partials stream as you pause); Enter sends"></textarea>
  <div class="buttons">
    <button class="nod-btn" title="acknowledge">Nod</button>
    <button class="bc-btn" title="acknowledge aloud">Uh-huh</button>
    <button class="settings-btn">Settings</button>
    <button class="reconnect-btn hidden">Reconnect</button>
  </div>
  <div class="drawer hidden">
    <label>Partial debounce (ms)
      <input class="debounce" type="number" min="50" step="50" value="300">
    </label>
  </div>`;
root.appendChild(controls);

const input = controls.querySelector(".say") as HTMLTextAreaElement;
const nodButton = controls.querySelector(".nod-btn") as HTMLButtonElement;
const bcButton = controls.querySelector(".bc-btn") as HTMLButtonElement;
const settingsButton = controls.querySelector(".settings-btn") as HTMLButtonElement;
const reconnectButton = controls.querySelector(".reconnect-btn") as HTMLButtonElement;
const drawer = controls.querySelector(".drawer") as HTMLElement;
const debounceInput = controls.querySelector(".debounce") as HTMLInputElement;

const client = new EngineClient(window.location.origin, {
  onAction: (message) => view.applyAction(message),
  onStatus: (state) => {
    if (state === "connected") {
      view.setStatus("connected", "ok");
      input.disabled = false;
      reconnectButton.classList.add("hidden");
    } else {
      view.setStatus("disconnected — input disabled", "warn");
      input.disabled = true;
      reconnectButton.classList.remove("hidden");
    }
  },
});

const emitter = new PartialEmitter(
  (message) => client.sendAsr(message.type, message.text, message.seq, message.t_ms),
  { nextSeq: () => client.nextSeq() },
);

input.addEventListener("input", () => emitter.handleInput(input.value));
input.addEventListener("keydown", (event) => {
  if (event.key === "Enter" && !event.shiftKey) {
    event.preventDefault();
    const text = input.value.trim();
    if (text) {
      view.addUserUtterance(text);
    }
    emitter.finalize();
    input.value = "";
  }
});

nodButton.addEventListener("click", () => client.sendAck("user_nod"));
bcButton.addEventListener("click", () => client.sendAck("user_backchannel"));
settingsButton.addEventListener("click", () => drawer.classList.toggle("hidden"));
debounceInput.addEventListener("change", () => {
  const value = Number(debounceInput.value);
  if (Number.isFinite(value) && value >= 50) {
    emitter.setDebounce(value);
  }
});
reconnectButton.addEventListener("click", () => {
  client.connect().catch(() => view.setStatus("reconnect failed", "warn"));
});

client.connect().catch(() => view.setStatus("engine unreachable", "warn"));
