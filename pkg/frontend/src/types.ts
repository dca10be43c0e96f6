/** Wire types mirrored from the engine's HTTP API. */

export interface GeoPointLatLon {
	lat: number;
	lon: number;
}

export interface NotificationAction {
	label: string;
	kind: "open_popup" | "respond_yes" | "respond_no" | "navigate";
	url?: string;
}

export interface ConditionRecord {
	kind: "air" | "noise" | "rain";
	label: string;
	value: number;
	threshold: number;
	unit?: string;
	category?: string;
	sensor?: string;
	distance_m?: number;
}

export interface RelatedPoi {
	id: string;
	name: string;
	distance_m: number;
	score: number;
	indoor?: boolean;
}

export interface NotificationRecord {
	id: number;
	t: number;
	user: string;
	scenario: "S1_Proximity" | "S2_Environment" | "S3_Forecast";
	channel: "Push" | "PetPopup";
	pet: "panda" | "lynx";
	title: string;
	body: string;
	justification: string;
	actions: NotificationAction[];
	related: {
		poi?: RelatedPoi;
		conditions?: ConditionRecord[];
		excursion?: string;
		district?: string;
		date?: string;
		severity?: string;
		dominant?: string;
	} | null;
}

export interface PoiRecord {
	id: string;
	name: string;
	lat: number;
	lon: number;
	categories: string[];
	indoor: boolean;
	tags: string[];
	distance_m?: number;
}

export interface BigFiveBody {
	openness: number;
	conscientiousness: number;
	extraversion: number;
	agreeableness: number;
	neuroticism: number;
}

export interface ProfileBody {
	user_id: string;
	pet: "panda" | "lynx";
	bigfive: BigFiveBody;
	preferred_categories: string[];
	constraints: string[];
}

export type SensorKindName = "air" | "noise" | "rain";

export interface UiConfig {
	/** Base URL of the engine service, e.g. http://127.0.0.1:8000 */
	apiBase: string;
	/** Simulated walking speed of the avatar (m/s). */
	walkSpeedMps: number;
	/** Simulated seconds between two location fixes. */
	fixIntervalS: number;
	/** Long-poll budget handed to the notifications endpoint (s). */
	pollWaitS: number;
	/** Real milliseconds between fixes so walking is visible; 0 in tests. */
	walkPaceMs: number;
}

export const DEFAULT_CONFIG: UiConfig = {
	apiBase: "http://127.0.0.1:8000",
	walkSpeedMps: 1.2,
	fixIntervalS: 5,
	pollWaitS: 20,
	walkPaceMs: 40,
};
