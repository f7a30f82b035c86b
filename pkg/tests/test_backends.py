"""Remote backend clients against a live local HTTP server."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest

from ndv.embed import RemoteEmbedBackend, embed_batch
from ndv.errors import BackendUnavailable, ProtocolError
from ndv.nermask import RemoteNerBackend, StubNerBackend, annotate


class _Handler(BaseHTTPRequestHandler):
    """Dispatches on path; reply payloads are injected via the server object."""

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        request = json.loads(self.rfile.read(length))
        reply, status = self.server.make_reply(self.path, request)
        body = json.dumps(reply).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def backend_server():
    server = HTTPServer(("127.0.0.1", 0), _Handler)
    replies = {}

    def make_reply(path, request):
        fn = replies.get(path)
        if fn is None:
            return {"detail": "no such path"}, 404
        return fn(request)

    server.make_reply = make_reply
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    url = f"http://127.0.0.1:{server.server_port}"
    yield url, replies
    server.shutdown()


class TestRemoteNer:
    def test_round_trip_through_wire_protocol(self, backend_server):
        url, replies = backend_server
        stub = StubNerBackend()

        def reply(request):
            batches = stub.annotate_batch(request["texts"])
            return {
                "annotations": [
                    [{"token": a.token, "start": a.start, "end": a.end, "tag": a.tag}
                     for a in anns]
                    for anns in batches
                ]
            }, 200

        replies["/ner"] = reply
        remote = RemoteNerBackend(f"{url}/ner")
        texts = ["John Smith spoke", "quiet harbor day"]
        assert annotate(remote, texts) == annotate(stub, texts)

    def test_offsets_past_end_rejected(self, backend_server):
        url, replies = backend_server
        replies["/ner"] = lambda req: (
            {"annotations": [[{"token": "xx", "start": 0, "end": 99, "tag": "O"}]]},
            200,
        )
        with pytest.raises(ProtocolError):
            annotate(RemoteNerBackend(f"{url}/ner"), ["ab"])

    def test_malformed_reply_rejected(self, backend_server):
        url, replies = backend_server
        replies["/ner"] = lambda req: ({"annotations": "nope"}, 200)
        with pytest.raises(ProtocolError):
            annotate(RemoteNerBackend(f"{url}/ner"), ["ab"])

    def test_unreachable_backend_surfaces_after_retries(self):
        remote = RemoteNerBackend("http://127.0.0.1:9/ner", retries=2, timeout_s=0.5)
        with pytest.raises(BackendUnavailable):
            annotate(remote, ["text"])

    def test_server_errors_retried_then_surfaced(self, backend_server):
        url, replies = backend_server
        calls = []

        def flaky(request):
            calls.append(1)
            return {"detail": "boom"}, 500

        replies["/ner"] = flaky
        remote = RemoteNerBackend(f"{url}/ner", retries=3)
        with pytest.raises(BackendUnavailable):
            annotate(remote, ["text"])
        assert len(calls) == 3


class TestRemoteEmbed:
    def test_round_trip_and_model_name_sent(self, backend_server):
        url, replies = backend_server
        seen = {}

        def reply(request):
            seen["model"] = request["model"]
            return {"dim": 4, "vectors": [[1.0, 2.0, 2.0, 0.0]] * len(request["texts"])}, 200

        replies["/embed"] = reply
        remote = RemoteEmbedBackend(f"{url}/embed", model="same-story")
        vecs = embed_batch(remote, ["a", "b"])
        assert seen["model"] == "same-story"
        assert len(vecs) == 2
        assert vecs[0] == pytest.approx([1 / 3, 2 / 3, 2 / 3, 0.0])

    def test_dim_change_between_calls_rejected(self, backend_server):
        url, replies = backend_server
        dims = iter([4, 8])

        def reply(request):
            d = next(dims)
            return {"dim": d, "vectors": [[1.0] * d]}, 200

        replies["/embed"] = reply
        remote = RemoteEmbedBackend(f"{url}/embed")
        embed_batch(remote, ["a"])
        with pytest.raises(ProtocolError):
            embed_batch(remote, ["b"])

    def test_row_count_mismatch_rejected(self, backend_server):
        url, replies = backend_server
        replies["/embed"] = lambda req: ({"dim": 2, "vectors": [[1.0, 0.0]]}, 200)
        with pytest.raises(ProtocolError):
            embed_batch(RemoteEmbedBackend(f"{url}/embed"), ["a", "b"])

    def test_unreachable_backend(self):
        remote = RemoteEmbedBackend("http://127.0.0.1:9/embed", retries=2, timeout_s=0.5)
        with pytest.raises(BackendUnavailable):
            embed_batch(remote, ["text"])
