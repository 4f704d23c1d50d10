from django.urls import path
from .api import TrainingRunDetailView, TrainingRunListView

app_name = 'denoiser'

urlpatterns = [
    path("api/runs/", TrainingRunListView.as_view(), name="run_list"),
    path("api/runs/<int:pk>/", TrainingRunDetailView.as_view(), name="run_detail"),
]
