/** UI state and the action dispatch queue.
 *
 * The store is deliberately DOM-free so the whole interactive loop (walk,
 * receive push, tap, answer the shelter prompt) can be exercised headlessly
 * against a live engine. It never interprets sensor values itself; all
 * classification happens server-side and arrives as finished notifications.
 */

import { ApiClient } from "./api.js";
import { planFixes } from "./sim.js";
import type {
	GeoPointLatLon,
	NotificationRecord,
	PoiRecord,
	ProfileBody,
	SensorKindName,
	UiConfig,
} from "./types.js";

export interface OverlayToggles {
	air: boolean;
	noise: boolean;
	rain: boolean;
}

export interface InjectedSensor {
	id: string;
	kind: SensorKindName;
	point: GeoPointLatLon;
	value: number;
}

export interface UiState {
	user: string | null;
	pet: "panda" | "lynx";
	avatar: GeoPointLatLon | null;
	simT: number;
	walking: boolean;
	/** The single modal popup; the engine holds the same invariant. */
	pendingPopup: NotificationRecord | null;
	timeline: NotificationRecord[];
	lastSeenId: number;
	overlays: OverlayToggles;
	sensors: InjectedSensor[];
	pois: PoiRecord[];
	lastError: string | null;
}

type Listener = (state: UiState) => void;

const SENSOR_TYPES: Record<SensorKindName, { type: string; property: string }> = {
	air: { type: "AirQualityObserved", property: "pm25" },
	noise: { type: "NoiseLevelObserved", property: "LAeq" },
	rain: { type: "WeatherObserved", property: "precipitation" },
};

export class UiStore {
	readonly api: ApiClient;
	readonly config: UiConfig;
	state: UiState;

	private queue: Promise<unknown> = Promise.resolve();
	private listeners: Listener[] = [];
	private polling = false;
	private sensorSeq = 0;

	constructor(config: UiConfig, api?: ApiClient) {
		this.config = config;
		this.api = api ?? new ApiClient(config.apiBase);
		this.state = {
			user: null,
			pet: "panda",
			avatar: null,
			simT: 0,
			walking: false,
			pendingPopup: null,
			timeline: [],
			lastSeenId: 0,
			overlays: { air: true, noise: true, rain: true },
			sensors: [],
			pois: [],
			lastError: null,
		};
	}

	subscribe(listener: Listener): () => void {
		this.listeners.push(listener);
		return () => {
			this.listeners = this.listeners.filter((l) => l !== listener);
		};
	}

	private emit(): void {
		for (const listener of this.listeners) {
			listener(this.state);
		}
	}

	private set(patch: Partial<UiState>): void {
		this.state = { ...this.state, ...patch };
		this.emit();
	}

	/** All user actions run through one queue so they never interleave. */
	dispatch<T>(action: () => Promise<T>): Promise<T> {
		const next = this.queue.then(action, action);
		this.queue = next.catch(() => undefined);
		return next;
	}

	// -- session ------------------------------------------------------------

	createUser(profile: ProfileBody, start: GeoPointLatLon): Promise<void> {
		return this.dispatch(async () => {
			await this.api.createUser(profile);
			// join the service's virtual timeline wherever it currently is
			const { now } = await this.api.clock();
			this.set({ user: profile.user_id, pet: profile.pet, avatar: start, simT: now });
		});
	}

	async loadPois(): Promise<void> {
		const { pois } = await this.api.pois();
		this.set({ pois });
	}

	// -- walking --------------------------------------------------------------

	/** Click-to-walk: emit fixes toward the destination at walking speed,
	 * advancing the virtual clock one interval per fix. Notifications the
	 * engine returns inline land on the timeline immediately. */
	walkTo(destination: GeoPointLatLon): Promise<NotificationRecord[]> {
		return this.dispatch(async () => {
			const user = this.requireUser();
			const from = this.state.avatar;
			if (from === null) {
				throw new Error("avatar has no position yet");
			}
			const fixes = planFixes(from, destination, this.config.walkSpeedMps, this.config.fixIntervalS);
			const produced: NotificationRecord[] = [];
			this.set({ walking: true });
			try {
				for (const fix of fixes) {
					const t = this.state.simT + this.config.fixIntervalS;
					const result = await this.api.postLocation(user, fix.lat, fix.lon, t);
					this.set({ simT: t, avatar: fix });
					this.ingestRecords(result.notifications);
					produced.push(...result.notifications);
					if (this.config.walkPaceMs > 0) {
						await new Promise((resolve) => setTimeout(resolve, this.config.walkPaceMs));
					}
				}
			} finally {
				this.set({ walking: false });
			}
			return produced;
		});
	}

	// -- notifications ----------------------------------------------------------

	private ingestRecords(records: NotificationRecord[]): void {
		if (records.length === 0) {
			return;
		}
		const known = new Set(this.state.timeline.map((n) => n.id));
		const merged = [...this.state.timeline];
		let lastSeen = this.state.lastSeenId;
		for (const record of records) {
			if (!known.has(record.id)) {
				merged.push(record);
				known.add(record.id);
			}
			lastSeen = Math.max(lastSeen, record.id);
		}
		merged.sort((a, b) => a.id - b.id);
		this.set({ timeline: merged, lastSeenId: lastSeen });
	}

	/** One long-poll round; returns the records that were new. */
	async pollOnce(waitS?: number): Promise<NotificationRecord[]> {
		const user = this.requireUser();
		const { notifications } = await this.api.notifications(
			user,
			this.state.lastSeenId,
			waitS ?? this.config.pollWaitS,
		);
		this.ingestRecords(notifications);
		return notifications;
	}

	startPolling(): void {
		if (this.polling) {
			return;
		}
		this.polling = true;
		const loop = async () => {
			while (this.polling) {
				try {
					await this.pollOnce();
				} catch (error) {
					this.set({ lastError: String(error) });
					await new Promise((resolve) => setTimeout(resolve, 1000));
				}
			}
		};
		void loop();
	}

	stopPolling(): void {
		this.polling = false;
	}

	/** Tap a push: the engine expands it into the pet popup (modal). */
	tapNotification(notificationId: number): Promise<NotificationRecord> {
		return this.dispatch(async () => {
			const user = this.requireUser();
			const popup = await this.api.tap(user, notificationId);
			this.ingestRecords([popup]);
			this.set({ pendingPopup: popup });
			return popup;
		});
	}

	/** Answer the yes/no prompt of the open popup. A follow-up popup
	 * (shelter card or walk-on advice) replaces it; otherwise it closes. */
	respond(accepted: boolean): Promise<NotificationRecord | null> {
		return this.dispatch(async () => {
			const user = this.requireUser();
			const popup = this.state.pendingPopup;
			if (popup === null) {
				throw new Error("no popup is open");
			}
			const { notification } = await this.api.respond(user, popup.id, accepted);
			if (notification !== null) {
				this.ingestRecords([notification]);
			}
			this.set({ pendingPopup: notification });
			return notification;
		});
	}

	dismissPopup(): void {
		this.set({ pendingPopup: null });
	}

	toggleOverlay(kind: SensorKindName): void {
		this.set({ overlays: { ...this.state.overlays, [kind]: !this.state.overlays[kind] } });
	}

	// -- operator panel -----------------------------------------------------------

	/** Post a crafted sensor entity; the map overlay mirrors what was sent. */
	injectSensor(kind: SensorKindName, value: number, point: GeoPointLatLon): Promise<void> {
		return this.dispatch(async () => {
			const { type, property } = SENSOR_TYPES[kind];
			this.sensorSeq += 1;
			const sensorId = `ui-${kind}-${this.sensorSeq}`;
			const entity = {
				id: sensorId,
				type,
				dateObserved: this.state.simT,
				location: { type: "Point", coordinates: [point.lon, point.lat] },
				[property]: value,
			};
			const result = await this.api.ingestSensors([entity]);
			if (result.errors.length > 0) {
				throw new Error(result.errors[0]?.error ?? "sensor rejected");
			}
			this.set({ sensors: [...this.state.sensors, { id: sensorId, kind, point, value }] });
		});
	}

	injectForecast(
		district: string,
		date: string,
		day: { precip: number; wind: number; tmin: number; tmax: number; weatherType: string },
	): Promise<void> {
		return this.dispatch(async () => {
			await this.api.ingestForecast({
				district,
				days: [
					{
						forecastDate: date,
						precipIntensity: day.precip,
						windSpeed: day.wind,
						tMin: day.tmin,
						tMax: day.tmax,
						weatherType: day.weatherType,
					},
				],
			});
		});
	}

	scheduleExcursion(district: string, date: string, point: GeoPointLatLon): Promise<string> {
		return this.dispatch(async () => {
			const user = this.requireUser();
			const { excursion_id } = await this.api.addExcursion(
				user,
				{ lat: point.lat, lon: point.lon, district },
				date,
			);
			return excursion_id;
		});
	}

	/** Advance the virtual clock (firing due forecast polls server-side). */
	advanceClock(seconds: number): Promise<NotificationRecord[]> {
		return this.dispatch(async () => {
			const target = this.state.simT + seconds;
			const { notifications } = await this.api.tick(target);
			this.set({ simT: target });
			this.ingestRecords(notifications);
			return notifications;
		});
	}

	/** Date string for "N days from the current virtual day" (UTC). */
	dateInDays(days: number): string {
		const ms = (this.state.simT + days * 86400) * 1000;
		return new Date(ms).toISOString().slice(0, 10);
	}

	private requireUser(): string {
		if (this.state.user === null) {
			throw new Error("no user selected");
		}
		return this.state.user;
	}
}
