"""The collection service end to end, in one process.

A host posts its raw listing; the service logs it durably, scores it
against the active model, and answers with a verdict. An analyst labels
records later and exports the labeled slice as a training CSV. This demo
drives the real HTTP server on a loopback port.
"""
import json
import tempfile
import threading
import urllib.request
from pathlib import Path

from proctriage import (
    GenConfig,
    Label,
    TreeConfig,
    generate_dataset,
    generate_process_list,
    make_server,
    train_tree,
    tree_to_dict,
)
from proctriage.service import Service, ServiceConfig


def post(base, path, body, content_type="text/plain"):
    req = urllib.request.Request(base + path, data=body.encode(),
                                 headers={"Content-Type": content_type}, method="POST")
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read())


def get(base, path):
    with urllib.request.urlopen(base + path) as resp:
        return resp.read().decode()


with tempfile.TemporaryDirectory() as workdir:
    service = Service(ServiceConfig(data_dir=Path(workdir), port=0))
    server = make_server(service)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    print(f"serving on {base}")

    # arm it with a freshly trained tree
    model = train_tree(generate_dataset(GenConfig(seed=11)), TreeConfig(max_depth=4))
    info = post(base, "/v1/model", json.dumps(tree_to_dict(model)), "application/json")
    print(f"model active: {info['kind']} {info['model_id']}")
    print()

    # two hosts check in
    for label, title in ((Label.TARGET, "workstation"), (Label.SANDBOX, "sandbox")):
        listing = generate_process_list(label, seed=2)
        ack = post(base, "/v1/submit", listing)
        print(f"{title:>12}: verdict={ack['verdict']} p={ack['probability']:.3f} "
              f"id={ack['id'][:8]}...")
        # analyst confirms the verdict afterwards
        post(base, f"/v1/samples/{ack['id']}/label",
             json.dumps({"label": int(label)}), "application/json")

    print()
    print("labeled export:")
    print(get(base, "/v1/export.csv"))

    print("every submission also lives in the append-only log:")
    for log in sorted((Path(workdir) / "samples").glob("*.jsonl")):
        print(f"  {log.name}: {len(log.read_text().splitlines())} lines")

    server.shutdown()
    server.server_close()
