"""
URL configuration for AutoBlockLab project.

Only the admin is routed; it browses the runs archived with ``--record``.
"""
from django.contrib import admin
from django.urls import path

urlpatterns = [
    path('admin/', admin.site.urls),
]
