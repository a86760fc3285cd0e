/** JSON payload shapes of the walksense serve-mode API. */

export interface TaxonomyCategory {
  name: string;
  elements: string[];
}

export interface Taxonomy {
  categories: TaxonomyCategory[];
}

export interface Annotation {
  id: string;
  instance_id: string;
  t_start_ms: number;
  t_end_ms: number;
  category: string;
  element: string;
  note: string;
  author: string;
  created_at: number;
}

export interface ValidationEntry {
  severity: string;
  code: string;
  message: string;
}

export interface DatasetEntry {
  instance_id: string;
  city: string;
  country: string;
  path: string;
  status: string;
}

export interface DatasetIndex {
  root: string;
  entries: DatasetEntry[];
}

export interface InstanceMetadata {
  start_epoch_ms: number;
  stop_epoch_ms: number;
  video_fps: number;
  sensor_rate_hz: number;
  gps_rate_hz: number;
  city: string;
  country: string;
  facility: string;
  [key: string]: unknown;
}

export interface InstanceSummary {
  instance_id: string;
  distance_m: number;
  duration_s: number;
  video_frames: number;
  acc_points: number;
  gyr_points: number;
  mag_points: number;
  frames_estimated: boolean;
}

export interface InstanceDetail {
  instance_id: string;
  metadata: InstanceMetadata;
  summary: InstanceSummary;
  sensor_only: boolean;
}

export interface DownsampledSensor {
  t0_ms: number;
  dt_ms: number;
  channels: number[][];
}

export interface DownsampledSensors {
  rate_hz: number;
  sensors: Record<string, DownsampledSensor>;
}

export interface GeoJsonFeature {
  type: "Feature";
  geometry: { type: string; coordinates: number[][] };
  properties: Record<string, unknown>;
}

export interface GeoJsonDoc {
  type: "FeatureCollection";
  features: GeoJsonFeature[];
}
