/** Thin typed client over the engine's HTTP API. No business logic here:
 * every threshold decision stays on the server. */

import type { NotificationRecord, PoiRecord, ProfileBody } from "./types.js";

export class ApiError extends Error {
	constructor(
		public readonly status: number,
		public readonly reason: string,
		public readonly field?: string,
	) {
		super(`HTTP ${status}: ${reason}`);
	}
}

async function parseError(response: Response): Promise<ApiError> {
	let reason = response.statusText;
	let field: string | undefined;
	try {
		const body = (await response.json()) as { error?: { reason?: string; field?: string } };
		reason = body.error?.reason ?? reason;
		field = body.error?.field;
	} catch {
		// non-JSON error body; keep the status text
	}
	return new ApiError(response.status, reason, field);
}

export class ApiClient {
	constructor(private readonly base: string) {}

	private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
		const response = await fetch(this.base + path, {
			method,
			headers: body === undefined ? {} : { "content-type": "application/json" },
			body: body === undefined ? undefined : JSON.stringify(body),
		});
		if (!response.ok) {
			throw await parseError(response);
		}
		const text = await response.text();
		return (text.startsWith("{") || text.startsWith("[") ? JSON.parse(text) : text) as T;
	}

	healthz(): Promise<string> {
		return this.request("GET", "/healthz");
	}

	createUser(profile: ProfileBody): Promise<{ user_id: string }> {
		return this.request("POST", "/users", profile);
	}

	getUser(userId: string): Promise<ProfileBody> {
		return this.request("GET", `/users/${encodeURIComponent(userId)}`);
	}

	postLocation(
		userId: string,
		lat: number,
		lon: number,
		t: number,
	): Promise<{ accepted: boolean; notifications: NotificationRecord[] }> {
		return this.request("POST", `/users/${encodeURIComponent(userId)}/locations`, { lat, lon, t });
	}

	notifications(userId: string, sinceId: number, waitS = 0): Promise<{ notifications: NotificationRecord[] }> {
		const query = `since_id=${sinceId}&wait_s=${waitS}`;
		return this.request("GET", `/users/${encodeURIComponent(userId)}/notifications?${query}`);
	}

	tap(userId: string, notificationId: number): Promise<NotificationRecord> {
		return this.request("POST", `/users/${encodeURIComponent(userId)}/notifications/${notificationId}/tap`);
	}

	respond(
		userId: string,
		notificationId: number,
		accepted: boolean,
	): Promise<{ notification: NotificationRecord | null }> {
		return this.request(
			"POST",
			`/users/${encodeURIComponent(userId)}/notifications/${notificationId}/response`,
			{ accepted },
		);
	}

	ingestSensors(entities: object[]): Promise<{ accepted: number; errors: { index: number; error: string }[] }> {
		return this.request("POST", "/ingest/sensors", entities);
	}

	ingestForecast(document: object): Promise<{ accepted: number }> {
		return this.request("POST", "/ingest/forecast", { document });
	}

	addExcursion(
		userId: string,
		destination: { lat: number; lon: number; district: string },
		date: string,
	): Promise<{ excursion_id: string }> {
		return this.request("POST", `/users/${encodeURIComponent(userId)}/excursions`, { destination, date });
	}

	pois(near?: { lat: number; lon: number }, radiusM?: number): Promise<{ pois: PoiRecord[] }> {
		let query = "";
		if (near !== undefined) {
			query = `?near=${near.lat},${near.lon}`;
			if (radiusM !== undefined) {
				query += `&radius_m=${radiusM}`;
			}
		}
		return this.request("GET", `/pois${query}`);
	}

	clock(): Promise<{ now: number; mode: "virtual" | "wall" }> {
		return this.request("GET", "/admin/clock");
	}

	tick(toT: number): Promise<{ now: number; notifications: NotificationRecord[] }> {
		return this.request("POST", "/admin/tick", { to_t: toT });
	}
}
