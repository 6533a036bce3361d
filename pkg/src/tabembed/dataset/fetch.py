"""Dataset registry, download cache and raw-format normalization."""

from __future__ import annotations

import csv
import gzip
import hashlib
import io
import json
import os
import tarfile
import urllib.error
import urllib.request
import zipfile
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from filelock import FileLock

from tabembed.dataset.table import DataTable, load_csv
from tabembed.errors import FetchError, IntegrityError, ParseError, RegistryError

CACHE_ENV = "TABEMBED_CACHE_DIR"
OFFLINE_ENV = "TABEMBED_OFFLINE"
DELIMITERS = {"comma": ",", "semicolon": ";", "space": None, "tab": "\t"}


@dataclass(frozen=True)
class Source:
    url: str
    sha256: str | None
    member: str | None
    format: str
    delimiter: str
    header: bool
    order: tuple[int, ...] | None

    @property
    def filename(self) -> str:
        return self.url.rstrip("/").rsplit("/", 1)[-1]


@dataclass(frozen=True)
class DatasetEntry:
    name: str
    target: str
    columns: tuple[str, ...]
    sources: tuple[Source, ...]


def _parse_order(text: str) -> tuple[int, ...] | None:
    if text == "-":
        return None
    out: list[int] = []
    for part in text.split(","):
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return tuple(out)


def parse_registry(text: str) -> dict[str, DatasetEntry]:
    entries: dict[str, dict] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        kind, name, *pairs = line.split()
        fields = dict(p.split("=", 1) for p in pairs)
        if kind == "dataset":
            entries[name] = {
                "name": name,
                "target": fields["target"],
                "columns": tuple(fields["columns"].split(",")),
                "sources": [],
            }
        elif kind == "source":
            if name not in entries:
                raise RegistryError(f"line {lineno}: source for undeclared dataset {name!r}")
            entries[name]["sources"].append(
                Source(
                    url=fields["url"],
                    sha256=None if fields.get("sha256", "-") == "-" else fields["sha256"],
                    member=None if fields.get("member", "-") == "-" else fields["member"],
                    format=fields.get("format", "delimited"),
                    delimiter=fields.get("delimiter", "comma"),
                    header=fields.get("header", "0") == "1",
                    order=_parse_order(fields.get("order", "-")),
                )
            )
        else:
            raise RegistryError(f"line {lineno}: unknown record kind {kind!r}")
    out = {}
    for name, e in entries.items():
        if e["target"] not in e["columns"]:
            raise RegistryError(f"{name}: target {e['target']!r} not among columns")
        out[name] = DatasetEntry(e["name"], e["target"], e["columns"], tuple(e["sources"]))
    return out


def registry() -> dict[str, DatasetEntry]:
    text = resources.files("tabembed.dataset").joinpath("registry.txt").read_text(encoding="utf-8")
    return parse_registry(text)


def dataset_names() -> list[str]:
    return list(registry())


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    return Path(env) if env else Path.home() / ".cache" / "tabembed"


def _offline_default() -> bool:
    return os.environ.get(OFFLINE_ENV, "").lower() in ("1", "true", "yes")


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _download(url: str, dest: Path, timeout: float) -> None:
    tmp = dest.with_suffix(dest.suffix + ".part")
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp, open(tmp, "wb") as fh:
            while block := resp.read(1 << 20):
                fh.write(block)
    except (urllib.error.URLError, OSError, TimeoutError) as exc:
        tmp.unlink(missing_ok=True)
        raise FetchError(f"download of {url} failed: {exc}") from exc
    tmp.replace(dest)


def _verify(path: Path, source: Source) -> None:
    """Check a pinned digest, or record-then-verify one for unpinned sources."""
    digest = sha256_file(path)
    if source.sha256 is not None:
        if digest != source.sha256:
            raise IntegrityError(f"{path.name}: sha256 {digest} != pinned {source.sha256}")
        return
    record = path.with_name(path.name + ".sha256")
    if record.exists():
        expected = record.read_text().strip()
        if digest != expected:
            raise IntegrityError(f"{path.name}: sha256 {digest} != recorded {expected}")
    else:
        record.write_text(digest + "\n")


def _read_member(archive: Path, member: str | None) -> bytes:
    if member is None:
        data = archive.read_bytes()
    elif zipfile.is_zipfile(archive):
        with zipfile.ZipFile(archive) as zf:
            data = zf.read(member)
    elif tarfile.is_tarfile(archive):
        with tarfile.open(archive) as tf:
            fh = tf.extractfile(member)
            if fh is None:
                raise FetchError(f"{member} is not a regular file in {archive.name}")
            data = fh.read()
    else:
        raise FetchError(f"{archive.name} is neither zip nor tar but a member was requested")
    if member is not None and member.endswith(".gz"):
        data = gzip.decompress(data)
    return data


def _split_records(text: str, source: Source) -> list[list[str]]:
    lines = text.splitlines()
    if source.format == "keel":
        lines = [ln for ln in lines if not ln.lstrip().startswith("@")]
        delimiter = ","
    elif source.format == "orange":
        lines = lines[3:]
        delimiter = "\t"
    elif source.format == "delimited":
        delimiter = DELIMITERS[source.delimiter]
        if source.header:
            lines = lines[1:]
    else:
        raise RegistryError(f"unknown format {source.format!r}")
    lines = [ln for ln in lines if ln.strip()]
    if delimiter is None:
        return [ln.split() for ln in lines]
    return [[c.strip() for c in rec] for rec in csv.reader(lines, delimiter=delimiter)]


def normalize(data: bytes, source: Source, entry: DatasetEntry) -> list[list[str]]:
    """Turn raw bytes from ``source`` into rows in canonical column order."""
    records = _split_records(data.decode("utf-8", errors="replace"), source)
    width = len(entry.columns)
    out = []
    for i, rec in enumerate(records):
        row = [rec[j] for j in source.order] if source.order is not None else rec
        if len(row) != width:
            raise ParseError(f"{entry.name}: expected {width} cells, found {len(row)}", row_index=i)
        out.append(row)
    return out


def fetch_dataset(
    name: str,
    cache_dir: str | Path | None = None,
    offline: bool | None = None,
    timeout: float = 60.0,
) -> Path:
    """Return the path of the normalized CSV for ``name``, downloading if needed."""
    entries = registry()
    if name not in entries:
        raise RegistryError(f"unknown dataset {name!r}; known: {', '.join(entries)}")
    entry = entries[name]
    cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    offline = _offline_default() if offline is None else offline
    cache.mkdir(parents=True, exist_ok=True)
    target = cache / f"{name}.csv"
    meta_path = cache / f"{name}.json"
    with FileLock(str(cache / ".lock")):
        if target.exists() and meta_path.exists():
            meta = json.loads(meta_path.read_text())
            if sha256_file(target) != meta["csv_sha256"]:
                raise IntegrityError(f"cached {target.name} does not match its recorded checksum")
            return target
        downloads = cache / "downloads"
        downloads.mkdir(exist_ok=True)
        failures = []
        for source in entry.sources:
            raw = downloads / source.filename
            if not raw.exists():
                if offline:
                    failures.append(f"{source.url}: not cached (offline)")
                    continue
                try:
                    _download(source.url, raw, timeout)
                except FetchError as exc:
                    failures.append(str(exc))
                    continue
            _verify(raw, source)
            rows = normalize(_read_member(raw, source.member), source, entry)
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(entry.columns)
            writer.writerows(rows)
            target.write_text(buf.getvalue(), encoding="utf-8")
            meta = {
                "name": name,
                "url": source.url,
                "member": source.member,
                "raw_sha256": sha256_file(raw),
                "csv_sha256": sha256_file(target),
                "rows": len(rows),
            }
            meta_path.write_text(json.dumps(meta, indent=2) + "\n")
            return target
        raise FetchError(f"could not obtain {name!r}: " + "; ".join(failures))


def load_dataset(name: str, cache_dir: str | Path | None = None, offline: bool | None = None) -> DataTable:
    path = fetch_dataset(name, cache_dir=cache_dir, offline=offline)
    return load_csv(path, target_name=registry()[name].target)


def source_info(name: str, cache_dir: str | Path | None = None) -> dict:
    """Metadata recorded when ``name`` was normalized into the cache."""
    cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    return json.loads((cache / f"{name}.json").read_text())
