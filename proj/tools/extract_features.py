#!/usr/bin/env python3
# Copyright 2026 The TIER Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Precomputes pretrained encoder features for the `tier` pretrained adapters.

Writes `key,f0,...,f{dim-1}` CSV files. Text keys are prompts; image keys are
the manifest's image_path strings, so the files line up with what the C++
adapters look up.

  text:  bert-base / bert-large, pooled [CLS] output
  image: resnet18 / resnet50 (torchvision), inceptionv4 (timm), global
         average pooled final feature map

Point an encoder's `feature_file` at the output, e.g.
  {"name": "resnet50", "feature_file": "features/resnet50.csv"}
"""

import argparse
import csv
import os
import sys
import zlib

import torch

TEXT_MODELS = {"bert-base": ("bert-base-uncased", 768), "bert-large": ("bert-large-uncased", 1024)}
IMAGE_MODELS = {"resnet18": 512, "resnet50": 2048, "inceptionv4": 1536}


def read_manifest(path):
    with open(path, newline="", encoding="utf-8-sig") as f:
        return list(csv.DictReader(f))


def stand_in_ids(prompts):
    # Stable word ids for --random-init runs, where no vocabulary is fetched.
    seqs = [[101] + [1000 + zlib.crc32(w.encode()) % 20000 for w in p.split()][:75] + [102] for p in prompts]
    width = max(len(s) for s in seqs)
    ids = torch.zeros(len(seqs), width, dtype=torch.long)
    mask = torch.zeros(len(seqs), width, dtype=torch.long)
    for i, s in enumerate(seqs):
        ids[i, :len(s)] = torch.tensor(s)
        mask[i, :len(s)] = 1
    return {"input_ids": ids, "attention_mask": mask}


def text_features(name, prompts, random_init, batch_size):
    from transformers import AutoTokenizer, BertConfig, BertModel

    hub_id, dim = TEXT_MODELS[name]
    if random_init:
        cfg = BertConfig() if name == "bert-base" else BertConfig(
            hidden_size=1024, num_hidden_layers=24, num_attention_heads=16, intermediate_size=4096)
        model = BertModel(cfg)
        tokenizer = None
    else:
        model = BertModel.from_pretrained(hub_id)
        tokenizer = AutoTokenizer.from_pretrained(hub_id)
    model.eval()
    out = {}
    with torch.no_grad():
        for i in range(0, len(prompts), batch_size):
            chunk = prompts[i:i + batch_size]
            enc = tokenizer(chunk, padding=True, truncation=True, max_length=77, return_tensors="pt") \
                if tokenizer is not None else stand_in_ids(chunk)
            pooled = model(**enc).pooler_output
            assert pooled.shape[1] == dim
            for p, v in zip(chunk, pooled):
                out[p] = v.tolist()
    return out


def image_model(name, random_init):
    if name == "inceptionv4":
        import timm
        model = timm.create_model("inception_v4", pretrained=not random_init, num_classes=0)
        return model, 299, (0.5, 0.5, 0.5), (0.5, 0.5, 0.5)
    import torchvision
    ctor = getattr(torchvision.models, name)
    weights = None if random_init else "IMAGENET1K_V1"
    model = ctor(weights=weights)
    model.fc = torch.nn.Identity()
    return model, 224, (0.485, 0.456, 0.406), (0.229, 0.224, 0.225)


def image_features(name, root, paths, random_init, batch_size):
    from PIL import Image
    from torchvision import transforms

    model, size, mean, std = image_model(name, random_init)
    model.eval()
    prep = transforms.Compose([
        transforms.Resize(int(size * 256 / 224)),
        transforms.CenterCrop(size),
        transforms.ToTensor(),
        transforms.Normalize(mean, std),
    ])
    out = {}
    with torch.no_grad():
        for i in range(0, len(paths), batch_size):
            chunk = paths[i:i + batch_size]
            batch = torch.stack([prep(Image.open(os.path.join(root, p)).convert("RGB")) for p in chunk])
            feats = model(batch)
            assert feats.shape[1] == IMAGE_MODELS[name]
            for p, v in zip(chunk, feats):
                out[p] = v.tolist()
    return out


def write_features(path, features, dim):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["key"] + [f"f{j}" for j in range(dim)])
        for key, values in features.items():
            w.writerow([key] + [repr(float(x)) for x in values])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--manifest", required=True)
    ap.add_argument("--encoder", required=True, choices=sorted(TEXT_MODELS) + sorted(IMAGE_MODELS))
    ap.add_argument("--out", required=True)
    ap.add_argument("--batch-size", type=int, default=16)
    ap.add_argument("--random-init", action="store_true", help="skip weight download (smoke tests only)")
    args = ap.parse_args(argv)

    torch.manual_seed(0)
    rows = read_manifest(args.manifest)
    if args.encoder in TEXT_MODELS:
        prompts = list(dict.fromkeys(r["prompt"] for r in rows))
        feats = text_features(args.encoder, prompts, args.random_init, args.batch_size)
        dim = TEXT_MODELS[args.encoder][1]
    else:
        root = os.path.dirname(os.path.abspath(args.manifest))
        paths = list(dict.fromkeys(r["image_path"] for r in rows))
        feats = image_features(args.encoder, root, paths, args.random_init, args.batch_size)
        dim = IMAGE_MODELS[args.encoder]
    write_features(args.out, feats, dim)
    print(f"{len(feats)} {args.encoder} features -> {args.out}", file=sys.stderr)


if __name__ == "__main__":
    main()
