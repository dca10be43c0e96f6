/** Pure HTML/SVG string renderers. The popup shows the engine's
 * justification verbatim (HTML-escaped, never reworded), and nothing in
 * here classifies a sensor value: the view draws what the server decided. */

import type { GeoPointLatLon, NotificationRecord, PoiRecord } from "./types.js";
import type { InjectedSensor, OverlayToggles } from "./store.js";

export function escapeHtml(text: string): string {
	return text
		.replaceAll("&", "&amp;")
		.replaceAll("<", "&lt;")
		.replaceAll(">", "&gt;")
		.replaceAll('"', "&quot;");
}

export function petAssetPath(pet: "panda" | "lynx"): string {
	return `assets/${pet}.svg`;
}

/** The centered pet dialog: mascot image plus a speech bubble with the
 * justification and one button per engine-provided action. */
export function renderPopup(popup: NotificationRecord): string {
	const buttons = popup.actions
		.map((action) => {
			if (action.kind === "navigate" && action.url !== undefined) {
				return `<a class="btn btn-nav" href="${escapeHtml(action.url)}" target="_blank" rel="noopener">${escapeHtml(action.label)}</a>`;
			}
			return `<button class="btn" data-action="${escapeHtml(action.kind)}">${escapeHtml(action.label)}</button>`;
		})
		.join("");
	const shelter = popup.related?.poi;
	const shelterCard =
		shelter !== undefined && popup.scenario === "S2_Environment"
			? `<div class="shelter-card" data-poi="${escapeHtml(shelter.id)}">
					<span class="shelter-name">${escapeHtml(shelter.name)}</span>
					<span class="shelter-distance">${shelter.distance_m} m away, indoors</span>
				</div>`
			: "";
	return `
		<div class="popup-backdrop" data-popup-id="${popup.id}">
			<div class="popup" role="dialog" aria-modal="true">
				<img class="pet" src="${petAssetPath(popup.pet)}" alt="your ${popup.pet}" />
				<div class="bubble">
					<p class="justification">${escapeHtml(popup.justification)}</p>
					${shelterCard}
					<div class="actions">${buttons}<button class="btn btn-quiet" data-action="dismiss">Close</button></div>
				</div>
			</div>
		</div>`;
}

/** Toast for an incoming push; tapping it opens the popup. */
export function renderToast(push: NotificationRecord): string {
	return `
		<div class="toast" data-notification-id="${push.id}">
			<img class="toast-pet" src="${petAssetPath(push.pet)}" alt="" />
			<div class="toast-text">
				<strong>${escapeHtml(push.title)}</strong>
				<span>${escapeHtml(push.body)}</span>
			</div>
		</div>`;
}

export function renderTimeline(records: NotificationRecord[]): string {
	if (records.length === 0) {
		return `<p class="timeline-empty">No notifications yet. Take a walk!</p>`;
	}
	const rows = [...records]
		.reverse()
		.map((record) => {
			const scenario = record.scenario.replace("_", " ");
			const text = record.channel === "Push" ? record.body : record.justification;
			return `<li class="timeline-row ${record.channel === "Push" ? "is-push" : "is-popup"}"
					data-notification-id="${record.id}" data-scenario="${escapeHtml(record.scenario)}">
				<span class="when">t=${record.t}s</span>
				<span class="what">${escapeHtml(scenario)} · ${escapeHtml(record.channel)}</span>
				<span class="text">${escapeHtml(text)}</span>
			</li>`;
		})
		.join("");
	return `<ul class="timeline">${rows}</ul>`;
}

export interface MapView {
	bbox: { latMin: number; lonMin: number; latMax: number; lonMax: number };
	width: number;
	height: number;
}

export function project(view: MapView, point: GeoPointLatLon): { x: number; y: number } {
	const { bbox, width, height } = view;
	const x = ((point.lon - bbox.lonMin) / (bbox.lonMax - bbox.lonMin)) * width;
	const y = (1 - (point.lat - bbox.latMin) / (bbox.latMax - bbox.latMin)) * height;
	return { x, y };
}

export function unproject(view: MapView, x: number, y: number): GeoPointLatLon {
	const { bbox, width, height } = view;
	return {
		lat: bbox.latMin + (1 - y / height) * (bbox.latMax - bbox.latMin),
		lon: bbox.lonMin + (x / width) * (bbox.lonMax - bbox.lonMin),
	};
}

/** Offline city map: a plain SVG with POI markers, sensor dots and the
 * avatar. Click handling is wired by the host page via data attributes. */
export function renderMap(
	view: MapView,
	pois: PoiRecord[],
	sensors: InjectedSensor[],
	avatar: GeoPointLatLon | null,
	overlays: OverlayToggles,
): string {
	const poiMarkers = pois
		.map((poi) => {
			const { x, y } = project(view, { lat: poi.lat, lon: poi.lon });
			const shape = poi.indoor
				? `<rect x="${x - 5}" y="${y - 5}" width="10" height="10" rx="2" class="poi poi-indoor" />`
				: `<circle cx="${x}" cy="${y}" r="5.5" class="poi poi-outdoor" />`;
			return `<g class="poi-marker" data-poi="${escapeHtml(poi.id)}">
				${shape}
				<text x="${x + 8}" y="${y + 4}" class="poi-label">${escapeHtml(poi.name)}</text>
			</g>`;
		})
		.join("");
	const sensorMarkers = sensors
		.filter((sensor) => overlays[sensor.kind])
		.map((sensor) => {
			const { x, y } = project(view, sensor.point);
			return `<g class="sensor sensor-${sensor.kind}" data-sensor="${escapeHtml(sensor.id)}">
				<circle cx="${x}" cy="${y}" r="4" />
				<title>${escapeHtml(sensor.id)}: ${sensor.value}</title>
			</g>`;
		})
		.join("");
	const avatarMarker =
		avatar === null
			? ""
			: (() => {
					const { x, y } = project(view, avatar);
					return `<g class="avatar"><circle cx="${x}" cy="${y}" r="7" /><circle cx="${x}" cy="${y}" r="3" class="avatar-dot" /></g>`;
				})();
	return `
		<svg class="city-map" viewBox="0 0 ${view.width} ${view.height}" data-role="map">
			<rect x="0" y="0" width="${view.width}" height="${view.height}" class="map-ground" />
			<g class="map-grid">${renderGrid(view)}</g>
			${poiMarkers}
			${sensorMarkers}
			${avatarMarker}
		</svg>`;
}

function renderGrid(view: MapView): string {
	const lines: string[] = [];
	const cells = 8;
	for (let i = 1; i < cells; i++) {
		const x = (view.width / cells) * i;
		const y = (view.height / cells) * i;
		lines.push(`<line x1="${x}" y1="0" x2="${x}" y2="${view.height}" />`);
		lines.push(`<line x1="0" y1="${y}" x2="${view.width}" y2="${y}" />`);
	}
	return lines.join("");
}
