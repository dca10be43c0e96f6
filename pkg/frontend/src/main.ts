/** Browser bootstrap: wires the store to the DOM. Kept as thin as possible;
 * everything interesting lives in store.ts and render.ts. */

import { UiStore } from "./store.js";
import {
	renderMap,
	renderPopup,
	renderTimeline,
	renderToast,
	unproject,
	type MapView,
} from "./render.js";
import { DEFAULT_CONFIG, type NotificationRecord, type UiConfig } from "./types.js";

const VIEW: MapView = {
	bbox: { latMin: 41.1455, lonMin: -8.617, latMax: 41.157, lonMax: -8.6035 },
	width: 820,
	height: 560,
};

const START = { lat: 41.15, lon: -8.61 };

function el<T extends HTMLElement>(id: string): T {
	const node = document.getElementById(id);
	if (node === null) {
		throw new Error(`missing element #${id}`);
	}
	return node as T;
}

async function loadConfig(): Promise<UiConfig> {
	try {
		const response = await fetch("config.json");
		if (!response.ok) {
			return DEFAULT_CONFIG;
		}
		return { ...DEFAULT_CONFIG, ...(await response.json()) };
	} catch {
		return DEFAULT_CONFIG;
	}
}

function banner(text: string): void {
	const node = el<HTMLDivElement>("banner");
	node.textContent = text;
	node.hidden = text === "";
}

async function main(): Promise<void> {
	const config = await loadConfig();
	const store = new UiStore(config);

	const mapHost = el<HTMLDivElement>("map");
	const timelineHost = el<HTMLDivElement>("timeline");
	const popupHost = el<HTMLDivElement>("popup-host");
	const toastHost = el<HTMLDivElement>("toast-host");
	const clockLabel = el<HTMLSpanElement>("sim-clock");
	let seenToasts = new Set<number>();

	function redraw(): void {
		const state = store.state;
		mapHost.innerHTML = renderMap(VIEW, state.pois, state.sensors, state.avatar, state.overlays);
		timelineHost.innerHTML = renderTimeline(state.timeline);
		popupHost.innerHTML = state.pendingPopup === null ? "" : renderPopup(state.pendingPopup);
		clockLabel.textContent = `t = ${state.simT.toFixed(0)} s`;
		for (const record of state.timeline) {
			if (record.channel === "Push" && !seenToasts.has(record.id)) {
				seenToasts.add(record.id);
				showToast(record);
			}
		}
		if (state.lastError !== null) {
			banner(`service error: ${state.lastError}`);
		}
	}

	function showToast(push: NotificationRecord): void {
		const wrapper = document.createElement("div");
		wrapper.innerHTML = renderToast(push);
		const toast = wrapper.firstElementChild as HTMLElement;
		toast.addEventListener("click", () => {
			toast.remove();
			store.tapNotification(push.id).catch((error) => banner(String(error)));
		});
		toastHost.appendChild(toast);
		setTimeout(() => toast.remove(), 30_000);
	}

	store.subscribe(redraw);

	// map click -> walk there
	mapHost.addEventListener("click", (event) => {
		const svg = mapHost.querySelector("svg");
		if (svg === null) {
			return;
		}
		const rect = svg.getBoundingClientRect();
		const x = ((event.clientX - rect.left) / rect.width) * VIEW.width;
		const y = ((event.clientY - rect.top) / rect.height) * VIEW.height;
		store.walkTo(unproject(VIEW, x, y)).catch((error) => banner(String(error)));
	});

	// popup actions (yes / no / dismiss)
	popupHost.addEventListener("click", (event) => {
		const target = event.target as HTMLElement;
		const action = target.dataset["action"];
		if (action === "respond_yes") {
			store.respond(true).catch((error) => banner(String(error)));
		} else if (action === "respond_no") {
			store.respond(false).catch((error) => banner(String(error)));
		} else if (action === "dismiss") {
			store.dismissPopup();
		}
	});

	// operator panel
	el<HTMLFormElement>("inject-form").addEventListener("submit", (event) => {
		event.preventDefault();
		const kind = el<HTMLSelectElement>("inject-kind").value as "air" | "noise" | "rain";
		const value = Number(el<HTMLInputElement>("inject-value").value);
		const near = store.state.avatar ?? START;
		store.injectSensor(kind, value, { lat: near.lat + 0.0005, lon: near.lon + 0.0006 })
			.then(() => banner(""))
			.catch((error) => banner(String(error)));
	});

	el<HTMLFormElement>("excursion-form").addEventListener("submit", (event) => {
		event.preventDefault();
		const district = el<HTMLInputElement>("excursion-district").value || "Porto";
		const days = Number(el<HTMLInputElement>("excursion-days").value);
		const date = store.dateInDays(days);
		const precip = Number(el<HTMLInputElement>("excursion-precip").value);
		store
			.injectForecast(district, date, { precip, wind: 20, tmin: 12, tmax: 18, weatherType: "Heavy rain" })
			.then(() => store.scheduleExcursion(district, date, START))
			.then(() => banner(`excursion scheduled for ${date}`))
			.catch((error) => banner(String(error)));
	});

	el<HTMLButtonElement>("advance-day").addEventListener("click", () => {
		store.advanceClock(86_400).catch((error) => banner(String(error)));
	});

	for (const kind of ["air", "noise", "rain"] as const) {
		el<HTMLInputElement>(`overlay-${kind}`).addEventListener("change", () => store.toggleOverlay(kind));
	}

	// session: one demo tourist
	try {
		await store.createUser(
			{
				user_id: "tourist",
				pet: (el<HTMLSelectElement>("pet-choice").value as "panda" | "lynx") ?? "panda",
				bigfive: { openness: 5, conscientiousness: 3, extraversion: 3, agreeableness: 3, neuroticism: 3 },
				preferred_categories: ["cultural"],
				constraints: [],
			},
			START,
		);
		await store.loadPois();
		store.startPolling();
		banner("");
	} catch (error) {
		banner(`service unreachable: ${error}`);
	}
	redraw();
}

void main();
