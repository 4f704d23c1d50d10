from django.urls import path
from .api import EvalReportDetailView, EvalReportListView

app_name = 'evaluation'

urlpatterns = [
    path("api/reports/", EvalReportListView.as_view(), name="report_list"),
    path("api/reports/<int:pk>/", EvalReportDetailView.as_view(), name="report_detail"),
]
