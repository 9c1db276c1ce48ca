"""Per-clip uni-modal caption enrichment.

Joint audio-visual captioning drops details, so each clip is described
three times by single-modality calls: objects from the center frame, the
visual activity from silent frames, and sounds from the audio track alone.
The original timestamped narrations ride along as the action channel.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .errors import EnrichmentError, GatewayError, MediaError
from .gateway import Attachment, ChatRequest, DecodeParams, GatewayClient, user_request
from .ingest import Clip, VideoManifest
from .prompts import AUDIO_CAPTION_PROMPT, IMAGE_CAPTION_PROMPT, VIDEO_CAPTION_PROMPT

logger = logging.getLogger(__name__)

_EPS = 1e-9


@dataclass(frozen=True)
class EnhancedNarrations:
    """The four text channels consumed by diversity scoring and the graph."""

    clip_id: str
    image_caption: str
    video_caption: str
    audio_caption: str
    action_narration: str
    center_frame_ref: Attachment | None = None


def action_narration_text(clip: Clip) -> str:
    """Member narrations with timestamps, one per line, in temporal order."""
    ordered = sorted(clip.segments, key=lambda s: (s.timestamp, s.narration_id))
    return "\n".join(f"[{seg.timestamp:.1f}s] {seg.text}" for seg in ordered)


def select_center_frame(clip: Clip, manifest: VideoManifest, fps: float = 1.0) -> Attachment:
    """Frame reference at the clip midpoint, snapped to the extraction grid."""
    if clip.end > manifest.duration + _EPS:
        raise MediaError(
            f"clip {clip.clip_id} ends at {clip.end:.2f}s but {manifest.video_id} "
            f"lasts only {manifest.duration:.2f}s"
        )
    midpoint = (clip.start + clip.end) / 2.0
    snapped = round(midpoint * fps) / fps
    snapped = min(max(snapped, 0.0), manifest.duration)
    return Attachment(kind="image_frame", locator=manifest.media_locator, time=snapped)


class Enricher:
    """Runs the three captioners through the gateway for one clip at a time."""

    def __init__(
        self,
        client: GatewayClient,
        *,
        image_model: str,
        video_model: str,
        audio_model: str,
        decode: DecodeParams | None = None,
        frame_fps: float = 1.0,
        max_frames: int = 32,
    ):
        self.client = client
        self.image_model = image_model
        self.video_model = video_model
        self.audio_model = audio_model
        self.decode = decode or DecodeParams(temperature=0.0)
        self.frame_fps = frame_fps
        self.max_frames = max_frames

    def _complete_caption(self, request: ChatRequest, channel: str, clip_id: str) -> str:
        """One captioner call; an empty reply is retried once, then fails."""
        for attempt in (1, 2):
            try:
                response = self.client.complete(request)
            except GatewayError as exc:
                raise EnrichmentError(
                    f"{channel} captioner failed for clip {clip_id}: {exc}",
                    channel=channel, clip_id=clip_id,
                ) from exc
            text = response.text.strip()
            if text:
                return text
            logger.warning("empty %s caption for clip %s (attempt %d)", channel, clip_id, attempt)
        raise EnrichmentError(
            f"{channel} captioner returned empty output twice for clip {clip_id}",
            channel=channel, clip_id=clip_id,
        )

    def caption_objects(self, frame: Attachment, clip_id: str = "") -> str:
        request = user_request(self.image_model, IMAGE_CAPTION_PROMPT,
                               attachments=(frame,), decode=self.decode)
        return self._complete_caption(request, "image", clip_id)

    def caption_video(self, clip: Clip, manifest: VideoManifest) -> str:
        frames = Attachment(
            kind="frame_sequence",
            locator=manifest.media_locator,
            start=clip.start,
            end=clip.end,
            fps=self.frame_fps,
            max_frames=self.max_frames,
        )
        request = user_request(self.video_model, VIDEO_CAPTION_PROMPT,
                               attachments=(frames,), decode=self.decode)
        return self._complete_caption(request, "video", clip.clip_id)

    def caption_audio(self, clip: Clip, manifest: VideoManifest) -> str:
        if clip.end - clip.start <= _EPS:
            raise EnrichmentError(
                f"clip {clip.clip_id} has a zero-length audio span",
                channel="audio", clip_id=clip.clip_id,
            )
        audio = Attachment(
            kind="audio_span",
            locator=manifest.media_locator,
            start=clip.start,
            end=clip.end,
        )
        request = user_request(self.audio_model, AUDIO_CAPTION_PROMPT,
                               attachments=(audio,), decode=self.decode)
        return self._complete_caption(request, "audio", clip.clip_id)

    def enhance_clip(self, clip: Clip, manifest: VideoManifest) -> EnhancedNarrations:
        """Assemble all four channels for a clip.

        Channel failures surface as EnrichmentError naming the channel so
        the pipeline can checkpoint the clip as incomplete and resume it.
        """
        frame = select_center_frame(clip, manifest, fps=self.frame_fps)
        image_caption = self.caption_objects(frame, clip.clip_id)
        video_caption = self.caption_video(clip, manifest)
        audio_caption = self.caption_audio(clip, manifest)
        return EnhancedNarrations(
            clip_id=clip.clip_id,
            image_caption=image_caption,
            video_caption=video_caption,
            audio_caption=audio_caption,
            action_narration=action_narration_text(clip),
            center_frame_ref=frame,
        )
