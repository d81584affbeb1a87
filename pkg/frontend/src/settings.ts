// Client settings persisted under the localStorage key "sve.settings".
// A storage backend is injected so headless tests run without a DOM.

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export interface Settings {
  dragScale: number; // meters per pixel for pushpull hand drags
  inputMode: "joystick-emu" | "pushpull-emu";
  stuttered: boolean;
  transitionKind: "walking" | "afterimage" | "dissolve" | "foresight";
  zoom: number; // pixels per meter
}

export const SETTINGS_KEY = "sve.settings";

export const DEFAULT_SETTINGS: Settings = {
  dragScale: 0.005,
  inputMode: "joystick-emu",
  stuttered: false,
  transitionKind: "walking",
  zoom: 12,
};

export function loadSettings(storage: StorageLike | null): Settings {
  const defaults = { ...DEFAULT_SETTINGS };
  if (!storage) return defaults;
  const raw = storage.getItem(SETTINGS_KEY);
  if (!raw) return defaults;
  try {
    const parsed = JSON.parse(raw) as Partial<Settings>;
    return { ...defaults, ...parsed };
  } catch {
    return defaults;
  }
}

export function saveSettings(storage: StorageLike | null, settings: Settings): void {
  if (!storage) return;
  storage.setItem(SETTINGS_KEY, JSON.stringify(settings));
}

/** The mapper name the server expects for a mode/stutter toggle pair. */
export function locomotionMode(settings: Settings): string {
  const base = settings.inputMode === "joystick-emu" ? "joystick" : "pushpull";
  return `${settings.stuttered ? "stuttered" : "smooth"}_${base}`;
}
