"""A fixed probabilistic directory grammar for synthetic web-site corpora.

Every site draws its own subset of sections and children from the shared
grammar, applies a naming style (lower case or Title case, plus a few
synonym choices such as ``about`` / ``about-us``) and grows site-specific
slugs at the leaves. Paths are sampled as random walks over the site's
tree. All randomness is derived from string seeds, so a site depends only
on ``(seed, site index)``.
"""

from __future__ import annotations

import random
from typing import Dict, List, Tuple

YEARS = [str(y) for y in range(2012, 2025)]
MONTHS = [f"{m:02d}" for m in range(1, 13)]
DEPARTMENTS = [
    "physics", "chemistry", "biology", "mathematics", "history", "economics", "philosophy", "psychology",
    "sociology", "linguistics", "astronomy", "geology", "computer-science", "engineering", "architecture",
    "music", "art", "law", "medicine", "nursing", "pharmacy", "dentistry", "education", "business",
    "finance", "marketing", "accounting", "statistics", "neuroscience", "genetics", "ecology", "anthropology",
    "archaeology", "classics", "english", "french", "spanish", "german", "theatre", "film", "journalism",
    "political-science", "public-health", "cardiology", "oncology", "pediatrics", "radiology", "surgery",
    "neurology", "orthopedics", "dermatology", "urology", "emergency", "geography", "agriculture",
    "veterinary", "materials", "aerospace", "robotics", "energy",
]
PROGRAMS = [
    "mba", "phd", "masters", "undergraduate", "online", "executive", "certificate", "summer", "exchange",
    "bachelors", "postdoc", "residency", "fellowship", "continuing-education", "honors", "minor",
    "joint-degree", "doctoral", "diploma", "evening",
]
CENTERS = [
    "ai-lab", "climate-center", "cancer-center", "data-science", "innovation-hub", "policy-institute",
    "imaging-center", "quantum-lab", "vision-lab", "sleep-center", "heart-institute", "brain-institute",
    "security-lab", "water-center", "urban-lab", "ethics-center", "language-lab", "space-lab",
]
SERVICES = [
    "billing", "it", "hr", "payroll", "parking", "housing", "dining", "security", "facilities", "printing",
    "transport", "counseling", "health", "legal", "procurement", "travel", "events", "mail", "catering",
    "childcare", "recreation", "translation", "imaging", "laboratory", "pharmacy", "rehabilitation",
]

# template -> [(child, child template, inclusion probability, walk weight)]
# A child starting with "@" expands to a pool of names; "@slug" means
# site-specific random names.
Rule = Tuple[str, str, float, float]
RULES: Dict[str, List[Rule]] = {
    "root": [
        ("news", "dated", 0.90, 10), ("about", "about", 0.90, 10), ("contact", "leaf", 0.75, 6),
        ("login", "auth", 0.55, 5), ("events", "events", 0.65, 7), ("research", "research", 0.50, 6),
        ("people", "people", 0.50, 6), ("services", "services", 0.55, 6), ("media", "media", 0.45, 5),
        ("departments", "dept_container", 0.45, 9), ("programs", "program_container", 0.35, 6),
        ("admissions", "admissions", 0.35, 4), ("careers", "careers", 0.50, 5), ("support", "support", 0.40, 4),
        ("blog", "dated", 0.35, 5), ("library", "library", 0.25, 3), ("students", "audience", 0.30, 3),
        ("faculty", "people", 0.25, 3), ("alumni", "audience", 0.25, 3), ("patients", "audience", 0.25, 3),
        ("visitors", "audience", 0.25, 2), ("giving", "giving", 0.25, 2), ("policies", "policies", 0.30, 2),
        ("search", "leaf", 0.40, 3), ("sitemap", "leaf", 0.30, 2), ("help", "support", 0.25, 3),
        ("account", "account", 0.35, 4), ("profile", "account", 0.20, 3), ("resources", "resources", 0.40, 4),
        ("publications", "dated", 0.30, 3), ("locations", "locations", 0.30, 3), ("investors", "investors", 0.20, 2),
        ("products", "products", 0.25, 4), ("shop", "products", 0.10, 2), ("api", "api", 0.15, 2),
        ("wp-content", "wp", 0.15, 2), ("admin", "admin", 0.15, 1), ("static", "static", 0.20, 1),
        ("images", "leaf", 0.30, 2), ("docs", "docs", 0.20, 3), ("@slug", "generic", 0.0, 1),
    ],
    "dated": [("@years", "year", 0.60, 4), ("archive", "dated", 0.30, 1), ("@slug", "leaf", 0.0, 1)],
    "year": [("@months", "month", 0.55, 3), ("@slug", "leaf", 0.0, 1)],
    "month": [("@slug", "leaf", 0.0, 1)],
    "events": [("calendar", "dated", 0.55, 4), ("upcoming", "leaf", 0.50, 2), ("past", "dated", 0.40, 2),
               ("@years", "year", 0.35, 2), ("@slug", "leaf", 0.0, 1)],
    "about": [(w, "leaf", 0.50, 2) for w in ("history", "leadership", "mission", "contact", "careers", "locations",
                                              "team", "faq", "policies", "vision", "board", "diversity")],
    "people": [("@slug", "person", 0.0, 4), ("directory", "leaf", 0.50, 2), ("staff", "people", 0.40, 2),
               ("faculty", "people", 0.40, 2), ("emeritus", "leaf", 0.25, 1)],
    "person": [(w, "leaf", 0.45, 1) for w in ("publications", "cv", "teaching", "research", "contact")],
    "dept_container": [("@departments", "dept", 0.18, 3)],
    "dept": [("people", "people", 0.65, 4), ("news", "dated", 0.65, 4), ("events", "events", 0.55, 3),
             ("research", "research", 0.55, 3), ("courses", "courses", 0.50, 3), ("contact", "leaf", 0.60, 2),
             ("about", "about", 0.55, 2), ("publications", "dated", 0.45, 2), ("seminars", "dated", 0.40, 2),
             ("facilities", "leaf", 0.35, 1), ("programs", "program_container", 0.35, 2),
             ("undergraduate", "program", 0.40, 2), ("graduate", "program", 0.40, 2)],
    "courses": [("@slug", "course", 0.0, 2), ("catalog", "leaf", 0.4, 1), ("schedule", "leaf", 0.4, 1)],
    "course": [(w, "leaf", 0.4, 1) for w in ("syllabus", "lectures", "assignments", "exams")],
    "program_container": [("@programs", "program", 0.30, 3)],
    "program": [(w, "leaf", 0.50, 2) for w in ("admissions", "curriculum", "faculty", "courses", "faq", "apply",
                                                "tuition", "contact", "requirements", "outcomes")],
    "research": [("centers", "center_container", 0.45, 3), ("projects", "projects", 0.50, 3),
                 ("publications", "dated", 0.50, 3), ("labs", "labs", 0.40, 2), ("grants", "leaf", 0.35, 1),
                 ("funding", "leaf", 0.35, 1), ("news", "dated", 0.30, 1)],
    "center_container": [("@centers", "center", 0.25, 2)],
    "center": [(w, t, 0.50, 2) for w, t in (("people", "people"), ("projects", "projects"),
                                            ("publications", "dated"), ("news", "dated"), ("events", "events"),
                                            ("contact", "leaf"))],
    "projects": [("@slug", "project", 0.0, 2)],
    "project": [(w, "leaf", 0.4, 1) for w in ("team", "publications", "data", "news")],
    "labs": [("@slug", "center", 0.0, 2)],
    "services": [("@services", "service", 0.25, 3)],
    "service": [(w, "leaf", 0.45, 1) for w in ("overview", "forms", "faq", "contact", "request", "hours")],
    "media": [("press-releases", "dated", 0.60, 4), ("news", "dated", 0.50, 3), ("gallery", "leaf", 0.45, 1),
              ("video", "leaf", 0.45, 1), ("podcasts", "dated", 0.30, 1), ("photos", "leaf", 0.40, 1),
              ("media-kit", "leaf", 0.30, 1), ("logos", "leaf", 0.25, 1)],
    "auth": [(w, "leaf", 0.45, 1) for w in ("reset", "sso", "register", "forgot-password", "callback")],
    "account": [("settings", "settings", 0.65, 3), ("orders", "orders", 0.50, 2), ("history", "leaf", 0.40, 1),
                ("billing", "leaf", 0.40, 1), ("logout", "leaf", 0.50, 1), ("addresses", "leaf", 0.30, 1),
                ("wishlist", "leaf", 0.25, 1)],
    "settings": [(w, "leaf", 0.55, 1) for w in ("info", "password", "notifications", "privacy", "security")],
    "orders": [("@slug", "leaf", 0.0, 1)],
    "admissions": [("apply", "leaf", 0.6, 2), ("requirements", "leaf", 0.5, 2), ("tuition", "leaf", 0.5, 2),
                   ("visit", "leaf", 0.4, 1), ("faq", "leaf", 0.5, 1), ("international", "leaf", 0.4, 1),
                   ("deadlines", "leaf", 0.4, 1), ("financial-aid", "aid", 0.5, 2)],
    "aid": [(w, "leaf", 0.5, 1) for w in ("scholarships", "grants", "loans", "forms")],
    "careers": [("jobs", "jobs", 0.60, 3), ("benefits", "leaf", 0.5, 1), ("internships", "leaf", 0.4, 1),
                ("culture", "leaf", 0.35, 1), ("apply", "leaf", 0.4, 1), ("faq", "leaf", 0.35, 1)],
    "jobs": [("@slug", "leaf", 0.0, 1)],
    "support": [(w, t, 0.45, 2) for w, t in (("faq", "leaf"), ("contact", "leaf"), ("tickets", "leaf"),
                                             ("downloads", "leaf"), ("docs", "docs"),
                                             ("knowledge-base", "kb"), ("status", "leaf"))],
    "kb": [("@slug", "leaf", 0.0, 1)],
    "audience": [(w, t, 0.45, 2) for w, t in (("resources", "resources"), ("events", "events"),
                                              ("news", "dated"), ("services", "services"), ("faq", "leaf"),
                                              ("contact", "leaf"), ("housing", "leaf"), ("health", "leaf"))],
    "library": [(w, t, 0.5, 1) for w, t in (("catalog", "leaf"), ("databases", "leaf"), ("hours", "leaf"),
                                            ("services", "services"), ("collections", "kb"), ("help", "leaf"))],
    "giving": [(w, "leaf", 0.5, 1) for w in ("donate", "ways-to-give", "annual-fund", "planned-giving", "contact")],
    "policies": [(w, "leaf", 0.5, 1) for w in ("privacy", "terms", "cookies", "accessibility", "security",
                                                "copyright")],
    "locations": [("@slug", "location", 0.0, 2)],
    "location": [(w, "leaf", 0.5, 1) for w in ("directions", "hours", "contact", "services", "parking")],
    "investors": [("reports", "year_only", 0.6, 2), ("governance", "leaf", 0.5, 1), ("stock", "leaf", 0.5, 1),
                  ("events", "events", 0.4, 1), ("press-releases", "dated", 0.5, 2), ("sec-filings", "leaf", 0.4, 1)],
    "year_only": [("@years", "leaf", 0.6, 1)],
    "products": [("@slug", "product", 0.0, 3), ("compare", "leaf", 0.3, 1), ("new", "leaf", 0.3, 1)],
    "product": [(w, "leaf", 0.45, 1) for w in ("features", "pricing", "specs", "reviews", "support", "downloads")],
    "api": [("v1", "api_version", 0.6, 2), ("v2", "api_version", 0.5, 2), ("docs", "docs", 0.5, 1)],
    "api_version": [(w, "leaf", 0.5, 1) for w in ("users", "auth", "status", "search", "items", "orders")],
    "wp": [("uploads", "year", 0.8, 3), ("themes", "kb", 0.5, 1), ("plugins", "kb", 0.5, 1)],
    "admin": [(w, "leaf", 0.5, 1) for w in ("login", "dashboard", "users", "settings")],
    "static": [(w, "leaf", 0.6, 1) for w in ("css", "js", "img", "fonts")],
    "resources": [(w, "leaf", 0.45, 1) for w in ("guides", "forms", "downloads", "faq", "tools", "links", "videos")],
    "docs": [(w, "leaf", 0.45, 1) for w in ("guides", "api", "faq", "tutorials", "reference")],
    "generic": [("@slug", "leaf", 0.0, 1), ("news", "dated", 0.3, 1), ("about", "leaf", 0.3, 1)],
    "leaf": [],
}
POOLS = {"@years": YEARS, "@months": MONTHS, "@departments": DEPARTMENTS, "@programs": PROGRAMS,
         "@centers": CENTERS, "@services": SERVICES}

# word -> alternative spellings; each site picks one spelling per word
SYNONYMS = {"about": ["about-us"], "contact": ["contact-us"], "news": ["newsroom"], "people": ["team"],
            "login": ["signin"], "careers": ["jobs"], "faq": ["faqs"], "events": ["calendar"]}
SYNONYM_RATE = 0.25
TITLE_CASE_RATE = 0.15
TLDS = ["edu", "gov", "com", "org"]
SYLLABLES = ["ka", "lo", "mi", "ren", "tor", "vel", "qua", "zen", "bri", "dor", "fen", "gal", "hix", "jun",
             "lum", "nor", "pex", "ros", "sul", "tam", "ux", "vor", "wyn", "yel"]


def grammar_dict() -> dict:
    """The grammar as a JSON-serialisable mapping."""
    return {
        "rules": {k: [list(r) for r in v] for k, v in RULES.items()},
        "pools": POOLS,
        "synonyms": SYNONYMS,
        "synonym_rate": SYNONYM_RATE,
        "title_case_rate": TITLE_CASE_RATE,
    }


def grammar_words() -> List[str]:
    """Every non-slug name the grammar can produce in lower case."""
    words = set()
    for rules in RULES.values():
        for child, _, _, _ in rules:
            if child in POOLS:
                words.update(POOLS[child])
            elif not child.startswith("@"):
                words.add(child)
    for alts in SYNONYMS.values():
        words.update(alts)
    return sorted(words)


class _Site:
    def __init__(self, seed: int, index: int):
        self.seed = seed
        self.index = index
        rng = random.Random(f"{seed}|site|{index}")
        self.title = rng.random() < TITLE_CASE_RATE
        self.spelling = {w: (rng.choice(alts) if rng.random() < SYNONYM_RATE else w)
                         for w, alts in sorted(SYNONYMS.items())}
        self.domain = f"site{index:03d}.{TLDS[index % len(TLDS)]}"
        self._cache: Dict[Tuple[str, ...], List[Tuple[str, str, float]]] = {}

    def surface(self, word: str) -> str:
        word = self.spelling.get(word, word)
        if self.title and not word[0].isdigit():
            word = word[0].upper() + word[1:]
        return word

    def _slug(self, rng: random.Random) -> str:
        n = rng.choice((2, 2, 3))
        return "-".join("".join(rng.choice(SYLLABLES) for _ in range(n)) for _ in range(rng.choice((1, 1, 2))))

    def children(self, path: Tuple[str, ...], template: str) -> List[Tuple[str, str, float]]:
        key = path + ("\x00" + template,)
        if key in self._cache:
            return self._cache[key]
        rng = random.Random(f"{self.seed}|node|{self.index}|{'/'.join(path)}|{template}")
        out: Dict[str, Tuple[str, float]] = {}
        for child, tmpl, p_incl, weight in RULES[template]:
            if child == "@slug":
                # a handful of site-specific names; more of them for slug-only templates
                k = rng.randint(1, 3) if len(RULES[template]) > 1 else rng.randint(3, 10)
                for _ in range(k):
                    out.setdefault(self._slug(rng), (tmpl, weight * rng.uniform(0.3, 1.0)))
                continue
            names = POOLS.get(child, [child])
            for name in names:
                if rng.random() < p_incl:
                    surface = name if child in POOLS and name[0].isdigit() else self.surface(name)
                    out.setdefault(surface, (tmpl, weight * rng.lognormvariate(0.0, 0.5)))
        result = [(w, t, wt) for w, (t, wt) in out.items()]
        self._cache[key] = result
        return result

    def walk(self, rng: random.Random) -> Tuple[str, ...]:
        path: Tuple[str, ...] = ()
        template = "root"
        while True:
            options = self.children(path, template)
            if not options:
                return path
            if path and rng.random() < min(0.85, 0.2 + 0.15 * len(path)):
                return path
            total = sum(wt for _, _, wt in options)
            r = rng.random() * total
            for word, tmpl, wt in options:
                r -= wt
                if r <= 0:
                    break
            path = path + (word,)
            template = tmpl


def sample_site(seed: int, index: int, n_paths: int) -> Tuple[str, List[Tuple[str, ...]]]:
    site = _Site(seed, index)
    rng = random.Random(f"{seed}|walk|{index}")
    seen = {}
    attempts = 0
    while len(seen) < n_paths and attempts < 30 * n_paths:
        attempts += 1
        p = site.walk(rng)
        if p:
            seen.setdefault(p, None)
    return site.domain, list(seen)


def sample_corpus(seed: int, n_sites: int, paths_per_site: int):
    from .dataset import Corpus
    sites = {}
    for i in range(n_sites):
        domain, paths = sample_site(seed, i, paths_per_site)
        sites[domain] = paths
    return Corpus(sites)
