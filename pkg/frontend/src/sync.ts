/**
 * Shared playback cursor linking video, sensor chart and map.
 *
 * All views express positions as wall-clock milliseconds on the
 * instance timeline.  Whoever moves (video timeupdate, chart click,
 * map hover) calls seek() and every other follower is repositioned to
 * the same instant.
 */

export interface TimeFollower {
  /** Move this view's cursor to the given timeline position. */
  seekTo(tMs: number): void;
}

export class PlaybackSync {
  private followers = new Set<TimeFollower>();
  private positionMsInternal: number;

  constructor(
    readonly startMs: number,
    readonly endMs: number,
  ) {
    this.positionMsInternal = startMs;
  }

  get positionMs(): number {
    return this.positionMsInternal;
  }

  attach(follower: TimeFollower): void {
    this.followers.add(follower);
    follower.seekTo(this.positionMsInternal);
  }

  detach(follower: TimeFollower): void {
    this.followers.delete(follower);
  }

  clamp(tMs: number): number {
    return Math.min(Math.max(tMs, this.startMs), this.endMs);
  }

  /** Reposition every follower except the one that originated the move. */
  seek(tMs: number, origin?: TimeFollower): void {
    this.positionMsInternal = this.clamp(tMs);
    for (const follower of this.followers) {
      if (follower !== origin) follower.seekTo(this.positionMsInternal);
    }
  }
}

/**
 * Minimal surface of an HTMLVideoElement the sync layer needs; tests
 * substitute a plain object.
 */
export interface VideoLike {
  currentTime: number;
  addEventListener(type: string, listener: () => void): void;
}

/** Maps video media time (seconds from 0) onto the instance timeline. */
export class VideoFollower implements TimeFollower {
  constructor(
    private video: VideoLike,
    private sync: PlaybackSync,
  ) {
    sync.attach(this);
    video.addEventListener("timeupdate", () => this.push());
    video.addEventListener("seeked", () => this.push());
  }

  seekTo(tMs: number): void {
    const target = (tMs - this.sync.startMs) / 1000;
    if (Math.abs(this.video.currentTime - target) > 0.05) {
      this.video.currentTime = target;
    }
  }

  private push(): void {
    this.sync.seek(this.sync.startMs + this.video.currentTime * 1000, this);
  }
}
