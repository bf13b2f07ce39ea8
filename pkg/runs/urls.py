from django.urls import path

from . import views

app_name = 'runs'

urlpatterns = [
    path('', views.RunManifestListView.as_view(), name='run-list'),
    path('<int:pk>/', views.RunManifestDetailView.as_view(), name='run-detail'),
]
