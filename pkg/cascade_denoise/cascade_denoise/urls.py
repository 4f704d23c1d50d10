from django.contrib import admin
from django.urls import path, include

urlpatterns = [
    path('admin/', admin.site.urls),
    path('', include('denoiser.urls', namespace='denoiser')),
    path('', include('evaluation.urls', namespace='evaluation')),
]
