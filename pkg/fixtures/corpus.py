"""The golden corpus: 28 visited pages from the Apple browsing domain.

Tests import PAGES to know what ingestion should produce; regenerating
history.ndjson and html_cache/ from it keeps everything in sync:

    python fixtures/corpus.py
"""

import hashlib
import json
from pathlib import Path

# (url, title, description, visit_count) — title None means the export has
# no title and ingestion must pull it from the cached HTML; description
# None means the page ships no cached HTML at all (unless title needs it).
PAGES = [
    ("http://tech.example/can-apple-do-it-again-iwatch",
     "Can Apple do it again with the iWatch Technology", None, 2),
    ("http://news.example/apple-fights-iphone-ruling-brazil",
     "Apple fights back against iPhone ruling in Brazil report", None, 1),
    ("http://news.example/apples-ownership-iphone-brazil-peril",
     "Apples ownership of iPhone name in Brazil in peril App", None, 1),
    ("http://news.example/apple-loses-iphone-trademark-brazil",
     "Apple loses iPhone trademark in Brazil report Apple C", None, 3),
    ("http://biz.example/apple-suppliers-tsmc-foxconn-5k-jobs",
     "Apple suppliers TSMC and Foxconn adding 5K jobs each", None, 1),
    ("http://forbes.example/apples-itv-samsungs-smarttv",
     "Will Apples iTV Actually Be Samsungs SmartTV Forbes", None, 2),
    ("http://fortune.example/apple-supply-chain-alarm-bells",
     "Apple supply chain alarm bells Apple 20 Fortune Tech",
     "Alarm bells are ringing across the Apple supply chain as Foxconn freezes hiring.", 1),
    ("http://webmd.example/apple-uses-side-effects",
     "APPLE Uses Side Effects Interactions and Warnings W",
     "Overview of the apple fruit covering nutrition vitamin content and common diet uses.", 2),
    ("http://nutrition.example/apple-fruit-nutrition-facts",
     "Apple fruit nutrition facts and health benefits",
     "Apple fruit nutrition facts with detailed health benefits and vitamin content.", 9),
    ("http://health.example/8-health-benefits-of-apples",
     "8 Health Benefits Of Apples", None, 5),
    ("http://garden.example/apple-fruit",
     None,  # title comes from the cached HTML: "Apple Fruit"
     "The apple is a sweet edible fruit rich in vitamin content and fiber.", 7),
    ("http://finance.example/a-year-after-apple-announced-its-dividend",
     "a-year-after-apple-announced-its-dividend-timing-cou", None, 1),
    ("http://tech.example/apple-tv-smaller-a5-processor",
     "Apple TV's new smaller A5 processor could be quietly",
     "A smaller A5 chip shows up inside the latest Apple TV running a tweaked ios build.", 2),
    ("http://tech.example/apple-https-default-app-store",
     "Apple finally flips switch on HTTPS by default in App S",
     "Connections to the App Store and itunes now default to encrypted HTTPS.", 1),
    ("http://court.example/apple-vs-samsung-round-2",
     "Apple vs Samsung Round 2 to proceed in California co", None, 4),
    ("http://fortune.example/sell-google-buy-apple",
     "Sell Google buy Apple Apple 20 Fortune Tech",
     "Why it could make sense to rotate out of Google shares and into Apple this spring.", 1),
    ("http://biz.example/apples-suppliers-terrible-february",
     "Apples Suppliers Had A Terrible February Business Inc",
     "Monthly sales tracked across suppliers fell sharply, with Foxconn revenue down in February.", 1),
    ("http://schools.example/spartanburg-district-7-laptop-plan",
     "Spartanburg District 7 board agrees to plan for laptop",
     "The school board approved a macbook and ipad purchase for every student in the district.", 1),
    ("http://news.example/macbook-pro-2013-release-june-10",
     "Macbook Pro 2013 release date June 10 at Apples WV", None, 3),
    ("http://leaks.example/2013-macbook-air-retina-black",
     "2013 MacBook Air Retina In Black Leaked Release Da", None, 2),
    ("http://iclarified.example/apple-to-update-macbook-pro",
     "iClarified Apple News Apple to Update the MacBook Pr", None, 1),
    ("http://sidhtech.example/nexus-4-galaxy-s3-iphone-5",
     "Nexus 4 vs Galaxy S3 vs iPhone 5 The 3 Kings SidhTe", None, 2),
    ("http://gizmo.example/iphone-5-vs-4s-durability-test",
     "Apple iPhone 5 vs iPhone 4S longterm durability test G", None, 3),
    ("http://deals.example/17-pounds-month-iphone-4",
     "Is £17 a month for a threeyearold iPhone 4 still a goo", None, 1),
    ("http://camera.example/camera-wars-apples-iphone-5",
     "Camera Wars Apples iPhone 5 Goes Head To Head Ag", None, 2),
    ("http://aio.example/aio-wireless-prepaid-iphone-5-plans",
     "Aio Wireless launches prepaid iPhone 5 plans starting at 55 per month",
     "Thursday saw the launch of a new prepaid wireless carrier as Aio, a subsidiary of AT&T, "
     "went live offering Apples iPhone 5 and service for 55 per month", 6),
    ("http://digitimes.example/apple-cuts-ipad-estimates",
     "Apple Cuts iPad Estimates DigiTimes Business Insider", None, 2),
    ("http://insider.example/supply-chain-poor-february-apple",
     "Supply Chain Indicators Point to Poor February for Ap", None, 1),
]

# 2013-06-01T00:00:00Z in microseconds, one day apart per page.
_EPOCH_US = 1370044800000000
_DAY_US = 86400000000

CACHE_TITLES = {
    "http://garden.example/apple-fruit": "Apple Fruit",
}


def last_visit_us(index: int) -> int:
    return _EPOCH_US + index * _DAY_US


def write_fixture(root: Path) -> None:
    lines = []
    for i, (url, title, _desc, visits) in enumerate(PAGES):
        record = {"url": url}
        if title is not None:
            record["title"] = title
        record["visit_count"] = visits
        record["last_visit_us"] = last_visit_us(i)
        lines.append(json.dumps(record))
    (root / "history.ndjson").write_text("\n".join(lines) + "\n", encoding="utf-8")

    cache = root / "html_cache"
    cache.mkdir(exist_ok=True)
    for url, title, desc, _visits in PAGES:
        page_title = title if title is not None else CACHE_TITLES[url]
        if desc is None and title is not None:
            continue  # no cached page needed
        meta = ""
        if desc is not None:
            escaped = desc.replace("&", "&amp;").replace('"', "&quot;")
            meta = f'\n<meta name="description" content="{escaped}">'
        html = (
            "<!DOCTYPE html>\n<html>\n<head>\n"
            f"<title>{page_title}</title>{meta}\n"
            "</head>\n<body>\n<p>cached copy</p>\n</body>\n</html>\n"
        )
        name = hashlib.sha256(url.encode("utf-8")).hexdigest() + ".html"
        (cache / name).write_text(html, encoding="utf-8")


if __name__ == "__main__":
    write_fixture(Path(__file__).resolve().parent)
    print("fixture files written")
