"""Outbound webhook channel for notifications.

Each notification is POSTed as
``{notification_id, recipient, event: {event_id, actor, action_kind,
output_id, used_targets, at}}``. Failures retry up to three times with
exponential backoff starting at one second; a dead endpoint never blocks
inbox delivery because the inbox record is already committed before the
sender runs.
"""

from __future__ import annotations

import logging
import threading
import time

import httpx

log = logging.getLogger(__name__)

RETRIES = 3
BASE_DELAY = 1.0


def notification_payload(notification, event) -> dict:
    event_data = event.as_dict()
    event_data.pop("visibility", None)
    return {
        "notification_id": notification.notification_id,
        "recipient": notification.recipient,
        "event": event_data,
    }


class WebhookSender:
    def __init__(self, url: str, poster=None, sleeper=time.sleep, background: bool = True):
        self.url = url
        self.poster = poster or self._http_post
        self.sleeper = sleeper
        self.background = background

    def _http_post(self, url: str, payload: dict) -> bool:
        response = httpx.post(url, json=payload, timeout=10)
        return response.status_code < 400

    def send(self, engine, notification, event) -> None:
        if self.background:
            threading.Thread(
                target=self._deliver, args=(engine, notification, event), daemon=True
            ).start()
        else:
            self._deliver(engine, notification, event)

    def _deliver(self, engine, notification, event) -> None:
        payload = notification_payload(notification, event)
        delay = BASE_DELAY
        for attempt in range(1 + RETRIES):
            try:
                if self.poster(self.url, payload):
                    engine.mark_delivered(notification.notification_id, "webhook")
                    return
            except Exception as exc:
                log.warning("webhook attempt %d failed: %s", attempt + 1, exc)
            if attempt < RETRIES:
                self.sleeper(delay)
                delay *= 2
        log.warning(
            "webhook delivery gave up for notification %s", notification.notification_id
        )
