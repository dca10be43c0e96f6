/** Local geometry for the walk simulator: turn a destination into the
 * sequence of location fixes the avatar will post. Plain equirectangular
 * math is fine at city scale. */

import type { GeoPointLatLon } from "./types.js";

export const METERS_PER_DEG_LAT = 111194.92664455873;

export function metersPerDegLon(lat: number): number {
	return METERS_PER_DEG_LAT * Math.cos((lat * Math.PI) / 180);
}

export function distanceMeters(a: GeoPointLatLon, b: GeoPointLatLon): number {
	const midLat = (a.lat + b.lat) / 2;
	const dy = (b.lat - a.lat) * METERS_PER_DEG_LAT;
	const dx = (b.lon - a.lon) * metersPerDegLon(midLat);
	return Math.hypot(dx, dy);
}

/** Fixes along the straight line from `from` to `to`, one per interval,
 * moving at `speedMps`. The final fix lands exactly on the destination. */
export function planFixes(
	from: GeoPointLatLon,
	to: GeoPointLatLon,
	speedMps: number,
	intervalS: number,
): GeoPointLatLon[] {
	const total = distanceMeters(from, to);
	if (total === 0 || speedMps <= 0 || intervalS <= 0) {
		return [];
	}
	const stepMeters = speedMps * intervalS;
	const steps = Math.ceil(total / stepMeters);
	const fixes: GeoPointLatLon[] = [];
	for (let i = 1; i <= steps; i++) {
		const fraction = Math.min(1, (i * stepMeters) / total);
		fixes.push({
			lat: from.lat + (to.lat - from.lat) * fraction,
			lon: from.lon + (to.lon - from.lon) * fraction,
		});
	}
	return fixes;
}
