# Configuration file for the deleted-DOI audit pipeline
# Every value can be overridden from the environment; CLI flags override both.

import os

# Service endpoints
DOI_RA_BASE = os.getenv("DOI_RA_BASE", "https://doi.org/doiRA")
CROSSREF_API_BASE = os.getenv("CROSSREF_API_BASE", "https://api.crossref.org")
DOI_PROXY_BASE = os.getenv("DOI_PROXY_BASE", "https://doi.org")

# Contact address for the Crossref polite pool (sent as mailto= and in the User-Agent)
DOI_AUDIT_MAILTO = os.getenv("DOI_AUDIT_MAILTO", "")

# On-disk response cache
DOI_AUDIT_CACHE = os.getenv("DOI_AUDIT_CACHE", os.path.expanduser("~/.cache/doi-audit"))

# Landing URI that Crossref uses for deleted content (matched as a prefix)
DELETED_DOI_URI = "https://www.crossref.org/_deleted-doi/"

# Request policy
RATE_LIMIT_PER_HOST = float(os.getenv("DOI_AUDIT_RATE_LIMIT", "5"))
CONCURRENCY = int(os.getenv("DOI_AUDIT_CONCURRENCY", "8"))
MAX_RETRIES = int(os.getenv("DOI_AUDIT_MAX_RETRIES", "3"))
INITIAL_RETRY_DELAY = float(os.getenv("DOI_AUDIT_INITIAL_RETRY_DELAY", "1"))
REQUEST_TIMEOUT = int(os.getenv("DOI_AUDIT_REQUEST_TIMEOUT", "30"))
MAX_REDIRECTS = int(os.getenv("DOI_AUDIT_MAX_REDIRECTS", "10"))

# Snapshot ingest (external merge sort)
CHUNK_BYTES = int(os.getenv("DOI_AUDIT_CHUNK_BYTES", str(256 * 1024 ** 2)))
SORT_WORKERS = int(os.getenv("DOI_AUDIT_SORT_WORKERS", "1"))

# Reporting
TOP_K = int(os.getenv("DOI_AUDIT_TOP_K", "10"))
REPORT_FORMATS = ("csv", "json", "markdown")

TOOL_NAME = "doi-audit"
TOOL_VERSION = "1.0.0"
