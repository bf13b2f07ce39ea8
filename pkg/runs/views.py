from rest_framework import generics

from .models import RunManifest
from .serializers import RunManifestSerializer


class RunManifestListView(generics.ListAPIView):
    """
    API endpoint to list recorded runs, newest first.
    Filter with ?command=<name> or ?digest=<prefix>.
    """

    serializer_class = RunManifestSerializer

    def get_queryset(self):
        queryset = RunManifest.objects.all()
        command = self.request.query_params.get('command')
        if command:
            queryset = queryset.filter(command=command)
        digest = self.request.query_params.get('digest')
        if digest:
            queryset = queryset.filter(digest__startswith=digest)
        return queryset


class RunManifestDetailView(generics.RetrieveAPIView):
    """API endpoint for a single run manifest."""

    queryset = RunManifest.objects.all()
    serializer_class = RunManifestSerializer
