#!/usr/bin/env python3
"""Regenerate the demo CSVs (seeded, so output is stable).

Three accounts with distinct health profiles over 2019: acme runs clean,
globex is middling with an incident-feed outage in June, initech struggles
with changes and security findings.
"""

from __future__ import annotations

import csv
import random
from pathlib import Path

OUT_DIR = Path(__file__).parent / "data"

ACCOUNTS = {
    # (fail rate, emergency rate, server fail rate, monitored, risk, db ticket lambda)
    "acme": (0.04, 0.05, 0.05, 0.95, 2.0, 1.5),
    "globex": (0.12, 0.15, 0.15, 0.75, 4.5, 5.0),
    "initech": (0.30, 0.35, 0.40, 0.30, 8.5, 30.0),
}
MONTHS = [f"2019-{m:02d}" for m in range(1, 13)]
CATEGORIES = ["server", "network", "database", "middleware"]
DB_SUMMARIES = [
    "Database Space Issue(N) on {h}",
    "Database Handler failure on {h}",
    "DB2 Instance Down(A) on {h}",
    "Database Job Warning(N) on {h}",
]
OTHER_SUMMARIES = [
    "CPU utilization high on {h}",
    "Filesystem nearly full on {h}",
    "Application unresponsive on {h}",
    "Backup job missed window on {h}",
]


def ts(rng: random.Random, month: str) -> str:
    day = rng.randrange(1, 28)
    return f"{month}-{day:02d}T{rng.randrange(24):02d}:{rng.randrange(60):02d}:00Z"


def month_drift(account: str, month: str) -> float:
    # initech degrades over the year, acme slowly improves
    idx = MONTHS.index(month)
    if account == "initech":
        return 1.0 + idx * 0.06
    if account == "acme":
        return 1.0 - idx * 0.02
    return 1.0


def gen_changes(rng: random.Random) -> list[list[str]]:
    rows = []
    for account, (fail, emergency, server_fail, *_rest) in ACCOUNTS.items():
        for month in MONTHS:
            drift = month_drift(account, month)
            for i in range(rng.randrange(18, 30)):
                category = rng.choice(CATEGORIES)
                rate = server_fail if category == "server" else fail
                status = "failed" if rng.random() < rate * drift else "completed"
                kind = "emergency" if rng.random() < emergency else "normal"
                rows.append([account, ts(rng, month), f"CHG{len(rows):05d}",
                             status, kind, category])
    return rows


def gen_incidents(rng: random.Random) -> list[list[str]]:
    rows = []
    for account, (*_rest, db_lambda) in ACCOUNTS.items():
        for month in MONTHS:
            if account == "globex" and month == "2019-06":
                continue  # feed outage: no incident data that month
            n_db = max(0, round(rng.gauss(db_lambda * month_drift(account, month), 1.5)))
            for _ in range(n_db):
                host = f"db{rng.randrange(1, 9):02d}.{account}.example"
                summary = rng.choice(DB_SUMMARIES).format(h=host)
                rows.append([account, ts(rng, month), f"INC{len(rows):05d}",
                             rng.choice(["low", "medium", "high"]), summary])
            for _ in range(rng.randrange(8, 16)):
                host = f"srv{rng.randrange(1, 20):02d}.{account}.example"
                summary = rng.choice(OTHER_SUMMARIES).format(h=host)
                rows.append([account, ts(rng, month), f"INC{len(rows):05d}",
                             rng.choice(["low", "medium", "high"]), summary])
    return rows


def gen_assets(rng: random.Random) -> list[list[str]]:
    rows = []
    for account, (_f, _e, _sf, monitored, *_rest) in ACCOUNTS.items():
        for month in MONTHS:
            for server in range(1, 13):
                flag = "enabled" if rng.random() < monitored else "disabled"
                rows.append([account, ts(rng, month),
                             f"srv{server:02d}.{account}.example", flag,
                             str(rng.randrange(1, 8))])
    return rows


def gen_compliance(rng: random.Random) -> list[list[str]]:
    rows = []
    for account, (*_rest, risk, _db) in ACCOUNTS.items():
        for month in MONTHS:
            if account == "initech" and month in ("2019-04", "2019-09"):
                continue  # scans skipped: missing risk score those months
            for _ in range(rng.randrange(1, 3)):
                score = min(10.0, max(0.0, rng.gauss(risk, 0.8)))
                rows.append([account, ts(rng, month), f"SCAN{len(rows):04d}",
                             f"{score:.1f}"])
    return rows


def write(name: str, header: list[str], rows: list[list[str]]) -> None:
    path = OUT_DIR / name
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    print(f"{path}: {len(rows)} rows")


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20190301)
    write("change.csv", ["account_id", "timestamp", "change_id", "status", "type", "category"],
          gen_changes(rng))
    write("incident.csv", ["account_id", "timestamp", "ticket_id", "severity", "summary"],
          gen_incidents(rng))
    write("asset.csv", ["account_id", "timestamp", "server_id", "monitoring", "age_years"],
          gen_assets(rng))
    write("compliance.csv", ["account_id", "timestamp", "scan_id", "risk_score"],
          gen_compliance(rng))


if __name__ == "__main__":
    main()
