import json
import logging
import math

from channels.generic.websocket import AsyncWebsocketConsumer

logger = logging.getLogger(__name__)

STEP_FIELDS = ("step", "loss", "iteration_losses", "flow_loss", "grad_norm", "exit_iteration")


def _finite_or_none(value):
    if isinstance(value, list):
        return [_finite_or_none(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


class TrainingRunConsumer(AsyncWebsocketConsumer):
    """
    Relays the steps of one training run.

    A client may send ``{"every": n}`` to receive only steps divisible by n.
    """

    async def connect(self):
        self.run_id = int(self.scope['url_route']['kwargs']['run_id'])
        self.room_group_name = f'run_{self.run_id}'
        self.every = 1

        await self.channel_layer.group_add(
            self.room_group_name,
            self.channel_name
        )

        await self.accept()

    async def disconnect(self, close_code):
        await self.channel_layer.group_discard(
            self.room_group_name,
            self.channel_name
        )

    async def receive(self, text_data=None, bytes_data=None):
        try:
            every = int(json.loads(text_data or "{}")["every"])
            if every < 1:
                raise ValueError(every)
        except (ValueError, KeyError, TypeError):
            logger.warning(f"run {self.run_id}: ignoring subscription message {text_data!r}")
            await self.send(text_data=json.dumps({"error": f"expected {{\"every\": n >= 1}}, got {text_data!r}"}))
            return
        self.every = every
        await self.send(text_data=json.dumps({"run": self.run_id, "every": every}))

    async def training_step(self, event):
        data = event['data']
        if data.get("step", 0) % self.every:
            return
        payload = {"run": self.run_id}
        payload.update({name: _finite_or_none(data[name]) for name in STEP_FIELDS if name in data})
        await self.send(text_data=json.dumps(payload))
