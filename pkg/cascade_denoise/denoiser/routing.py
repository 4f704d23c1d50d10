from django.urls import re_path
from . import consumers

websocket_urlpatterns = [
    re_path(r'ws/run/(?P<run_id>\d+)/$', consumers.TrainingRunConsumer.as_asgi()),
]
