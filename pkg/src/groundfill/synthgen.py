"""Privacy-safe synthetic student application packages.

Everything is generated from an explicit random seed under the documented
constraints (score ranges, grade mix, credit-weighted GPA) so downstream
grounding tests know the exact truth they must recover.
"""

from __future__ import annotations

import csv
import json
import random
import shutil
from dataclasses import asdict, dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Callable, Iterable, Optional

COURSE_POOL = (
    "English Literature",
    "American History",
    "World History",
    "Algebra II",
    "Geometry",
    "Pre-Calculus",
    "Calculus",
    "Biology",
    "Chemistry",
    "Physics",
    "Environmental Science",
    "Spanish",
    "French",
    "Computer Science",
    "Economics",
    "Psychology",
    "Studio Art",
)

GRADE_POINTS = {"A": 4.0, "A-": 3.7, "B+": 3.3, "B": 3.0}
GRADE_WEIGHTS = {"A": 0.70, "A-": 0.10, "B+": 0.10, "B": 0.10}
CREDIT_CHOICES = (0.5, 1.0)

AP_SCORE_WEIGHTS = {1: 0.05, 2: 0.10, 3: 0.25, 4: 0.30, 5: 0.30}
AP_SUBJECT_POOL = (
    "AP Chemistry",
    "AP Biology",
    "AP Calculus AB",
    "AP Physics 1",
    "AP English Language",
    "AP Statistics",
    "AP Psychology",
    "AP World History",
)
IB_SUBJECT_POOL = (
    "Biology HL",
    "Chemistry HL",
    "Mathematics SL",
    "English A SL",
    "History HL",
    "Spanish B SL",
    "Physics SL",
    "Economics HL",
)

AWARD_CATEGORIES = (
    "Academic Excellence",
    "Leadership",
    "Community Service",
    "STEM Achievement",
    "Arts Achievement",
    "Athletic Achievement",
)
ACTIVITY_TYPES = (
    ("Debate Team", "Prepared cases and argued in regional tournaments."),
    ("Robotics Team", "Built and programmed competition robots with teammates."),
    ("Science Fair", "Designed and presented an original research project."),
    ("Varsity Soccer", "Trained and competed on the varsity squad."),
    ("Concert Band", "Rehearsed and performed clarinet in seasonal concerts."),
    ("Community Volunteering", "Organized weekend food drives in the neighborhood."),
)

ORDINALS = ("First", "Second", "Third", "Fourth", "Fifth", "Sixth", "Seventh", "Eighth")

SEED_CSV_COLUMNS = (
    "legal_name",
    "used_name",
    "gender",
    "race",
    "ethnicity",
    "languages",
    "school_name",
    "school_city",
    "school_state",
)


@dataclass(frozen=True)
class SchoolRecord:
    name: str
    city: str
    state: str


@dataclass(frozen=True)
class StudentSeed:
    legal_name: str
    used_name: str
    gender: str
    race: str
    ethnicity: str
    languages: tuple[str, ...]
    school: SchoolRecord
    rng_seed: int

    def __post_init__(self):
        if not self.legal_name or not self.used_name:
            raise ValueError("names must be non-empty")
        if not (self.school.name and self.school.city and self.school.state):
            raise ValueError("school record must be complete")


@dataclass(frozen=True)
class Course:
    name: str
    grade: str
    credits: float


@dataclass(frozen=True)
class Transcript:
    student: str
    school: SchoolRecord
    student_id: str
    graduation_year: int
    courses: tuple[Course, ...]
    gpa: float


@dataclass(frozen=True)
class ActReport:
    composite: int
    english: int
    math: int
    reading: int
    science: int
    test_date: str
    candidate_id: str


@dataclass(frozen=True)
class SatReport:
    total: int
    ebrw: int
    math: int
    test_date: str
    registration_id: str


@dataclass(frozen=True)
class ApSubjectScore:
    subject: str
    score: int
    year: int


@dataclass(frozen=True)
class ApReport:
    subjects: tuple[ApSubjectScore, ...]
    candidate_id: str


@dataclass(frozen=True)
class IbSubjectScore:
    subject: str
    score: int


@dataclass(frozen=True)
class IbReport:
    subjects: tuple[IbSubjectScore, ...]
    total_points: int
    session: str
    candidate_id: str


@dataclass(frozen=True)
class TestReports:
    act: ActReport
    sat: SatReport
    ap: ApReport
    ib: IbReport


@dataclass(frozen=True)
class Certificate:
    award_type: str
    issuer: str
    date: str


@dataclass(frozen=True)
class ActivityRecord:
    activity_type: str
    description: str


@dataclass(frozen=True)
class StudentPackage:
    seed: StudentSeed
    transcript: Transcript
    reports: TestReports
    certificate: Certificate
    activity: ActivityRecord

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PackageValidation:
    passed: bool
    failures: tuple[str, ...]


def compute_gpa(courses: Iterable[Course]) -> float:
    """Credit-weighted grade-point mean, two decimals, half-up rounding.

    Decimal end to end: float division would misround exact .xx5 midpoints.
    """
    courses = list(courses)
    total_credits = sum(Decimal(str(c.credits)) for c in courses)
    if total_credits <= 0:
        raise ValueError("total credits must be positive")
    weighted = sum(
        Decimal(str(GRADE_POINTS[c.grade])) * Decimal(str(c.credits)) for c in courses
    )
    return float(
        (weighted / total_credits).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    )


def _weighted_choice(rng: random.Random, weights: dict) -> object:
    keys = list(weights)
    return rng.choices(keys, weights=[weights[k] for k in keys], k=1)[0]


def _random_date(rng: random.Random, year: int) -> str:
    month = rng.randint(1, 12)
    day = rng.randint(1, 28)
    return f"{month:02d}/{day:02d}/{year:04d}"


def generate_package(
    seed_row: dict | StudentSeed,
    school: Optional[SchoolRecord] = None,
    rng: Optional[random.Random] = None,
    rng_seed: int = 0,
) -> StudentPackage:
    """Deterministic package for a seed row; same inputs, byte-identical output."""
    if isinstance(seed_row, StudentSeed):
        seed = seed_row
    else:
        school = school or SchoolRecord(
            name=seed_row["school_name"],
            city=seed_row["school_city"],
            state=seed_row["school_state"],
        )
        languages = seed_row["languages"]
        if isinstance(languages, str):
            languages = tuple(p.strip() for p in languages.split(";") if p.strip())
        seed = StudentSeed(
            legal_name=seed_row["legal_name"],
            used_name=seed_row["used_name"],
            gender=seed_row["gender"],
            race=seed_row["race"],
            ethnicity=seed_row["ethnicity"],
            languages=tuple(languages),
            school=school,
            rng_seed=rng_seed,
        )
    rng = rng or random.Random(seed.rng_seed)

    graduation_year = rng.randint(2018, 2025)
    courses = tuple(
        Course(
            name=name,
            grade=_weighted_choice(rng, GRADE_WEIGHTS),
            credits=rng.choice(CREDIT_CHOICES),
        )
        for name in rng.sample(COURSE_POOL, 8)
    )
    transcript = Transcript(
        student=seed.legal_name,
        school=seed.school,
        student_id=f"{rng.randint(0, 999999):06d}",
        graduation_year=graduation_year,
        courses=courses,
        gpa=compute_gpa(courses),
    )

    act = ActReport(
        composite=rng.randint(20, 36),
        english=rng.randint(18, 36),
        math=rng.randint(18, 36),
        reading=rng.randint(18, 36),
        science=rng.randint(18, 36),
        test_date=_random_date(rng, graduation_year - 1),
        candidate_id=f"SYN-ACT-{rng.randint(0, 999999):06d}",
    )
    ebrw = rng.randrange(400, 801, 10)
    sat_math = rng.randrange(max(400, 1000 - ebrw), 801, 10)
    sat = SatReport(
        total=ebrw + sat_math,
        ebrw=ebrw,
        math=sat_math,
        test_date=_random_date(rng, graduation_year - 1),
        registration_id=f"SYN-SAT-{rng.randint(0, 999999):06d}",
    )
    ap_subjects = tuple(
        ApSubjectScore(
            subject=subject,
            score=_weighted_choice(rng, AP_SCORE_WEIGHTS),
            year=rng.randint(graduation_year - 2, graduation_year),
        )
        for subject in rng.sample(AP_SUBJECT_POOL, rng.randint(4, 6))
    )
    ap = ApReport(subjects=ap_subjects, candidate_id=f"SYN-AP-{rng.randint(0, 999999):06d}")
    ib_subjects = tuple(
        IbSubjectScore(subject=subject, score=rng.randint(1, 7))
        for subject in rng.sample(IB_SUBJECT_POOL, 6)
    )
    ib = IbReport(
        subjects=ib_subjects,
        total_points=sum(s.score for s in ib_subjects),
        session=f"{'May' if rng.random() < 0.5 else 'November'} {graduation_year}",
        candidate_id=f"SYN-IB-{rng.randint(0, 999999):06d}",
    )

    activity_type, description = ACTIVITY_TYPES[rng.randrange(len(ACTIVITY_TYPES))]
    certificate = Certificate(
        award_type=AWARD_CATEGORIES[rng.randrange(len(AWARD_CATEGORIES))],
        issuer=f"{seed.school.state} {_weighted_choice(rng, {'Scholastic': 1, 'Regional': 1, 'Honors': 1})} Society",
        date=_random_date(rng, graduation_year),
    )
    return StudentPackage(
        seed=seed,
        transcript=transcript,
        reports=TestReports(act=act, sat=sat, ap=ap, ib=ib),
        certificate=certificate,
        activity=ActivityRecord(activity_type=activity_type, description=description),
    )


def validate_package(pkg: StudentPackage) -> PackageValidation:
    """Completeness, range, and internal-consistency checks; failures listed."""
    failures: list[str] = []
    for name in ("act", "sat", "ap", "ib"):
        if getattr(pkg.reports, name, None) is None:
            failures.append(f"missing_report:{name}")
    if pkg.transcript is None:
        failures.append("missing_transcript")
    if pkg.certificate is None:
        failures.append("missing_certificate")
    if pkg.activity is None:
        failures.append("missing_activity")
    if failures:
        return PackageValidation(False, tuple(failures))

    t = pkg.transcript
    if len(t.courses) != 8:
        failures.append("course_count")
    if any(c.name not in COURSE_POOL for c in t.courses):
        failures.append("course_pool")
    if any(c.grade not in GRADE_POINTS for c in t.courses):
        failures.append("grade_values")
    if not 2018 <= t.graduation_year <= 2025:
        failures.append("range:graduation_year")
    if not (len(t.student_id) == 6 and t.student_id.isdigit()):
        failures.append("student_id_shape")
    if abs(t.gpa - compute_gpa(t.courses)) > 0.005:
        failures.append("gpa_inconsistent")

    act = pkg.reports.act
    if not 20 <= act.composite <= 36:
        failures.append("range:act.composite")
    for section in ("english", "math", "reading", "science"):
        if not 18 <= getattr(act, section) <= 36:
            failures.append(f"range:act.{section}")
    sat = pkg.reports.sat
    if not 1000 <= sat.total <= 1600:
        failures.append("range:sat.total")
    if not (400 <= sat.ebrw <= 800 and 400 <= sat.math <= 800):
        failures.append("range:sat.sections")
    if sat.total != sat.ebrw + sat.math:
        failures.append("sat_total_mismatch")
    ap = pkg.reports.ap
    if not 4 <= len(ap.subjects) <= 6:
        failures.append("range:ap.subject_count")
    if any(not 1 <= s.score <= 5 for s in ap.subjects):
        failures.append("range:ap.score")
    ib = pkg.reports.ib
    if any(not 1 <= s.score <= 7 for s in ib.subjects):
        failures.append("range:ib.score")
    if ib.total_points != sum(s.score for s in ib.subjects):
        failures.append("ib_total_mismatch")
    for report in (act.candidate_id, sat.registration_id, ap.candidate_id, ib.candidate_id):
        if not report.startswith("SYN-"):
            failures.append("id_not_synthetic")
    if pkg.certificate.award_type not in AWARD_CATEGORIES:
        failures.append("award_category")

    return PackageValidation(not failures, tuple(failures))


def render_package_text(pkg: StudentPackage) -> list[tuple[str, str]]:
    """Plain-text documents (profile, transcript, reports, certificate,
    activity) with stable labeled lines so every package fact is retrievable."""
    seed = pkg.seed
    t = pkg.transcript

    profile = [
        "# PERSONAL INFORMATION SHEET",
        f"Legal Name: {seed.legal_name}",
        f"Preferred Name: {seed.used_name}",
        f"Gender: {seed.gender}",
        f"Race: {seed.race}",
        f"Ethnicity: {seed.ethnicity}",
        f"Languages: {', '.join(seed.languages)}",
    ]

    transcript = [
        "# HIGH SCHOOL TRANSCRIPT",
        f"Student: {t.student}",
        f"Student ID: {t.student_id}",
        f"School Name: {t.school.name}",
        f"High School City: {t.school.city}",
        f"High School State: {t.school.state}",
        f"Graduation Year: {t.graduation_year}",
    ]
    for ordinal, course in zip(ORDINALS, t.courses):
        transcript.append(f"{ordinal} Course: {course.name}")
        transcript.append(f"{ordinal} Course Grade: {course.grade}")
        transcript.append(f"{ordinal} Course Credits: {course.credits}")
    transcript.append(f"Cumulative GPA: {t.gpa:.2f}")

    act = pkg.reports.act
    act_doc = [
        "# ACT EXAMINATION RESULTS",
        f"Candidate: {t.student}",
        f"Candidate ID: {act.candidate_id}",
        f"ACT Test Date: {act.test_date}",
        f"ACT Composite: {act.composite}",
        f"ACT English: {act.english}",
        f"ACT Math: {act.math}",
        f"ACT Reading: {act.reading}",
        f"ACT Science: {act.science}",
    ]

    sat = pkg.reports.sat
    sat_doc = [
        "# SAT EXAMINATION RESULTS",
        f"Candidate: {t.student}",
        f"Registration ID: {sat.registration_id}",
        f"SAT Test Date: {sat.test_date}",
        f"SAT Total: {sat.total}",
        f"SAT Evidence-Based Reading and Writing: {sat.ebrw}",
        f"SAT Math: {sat.math}",
    ]

    ap = pkg.reports.ap
    ap_doc = [
        "# AP EXAMINATION RESULTS",
        f"Candidate: {t.student}",
        f"AP Candidate ID: {ap.candidate_id}",
    ]
    for ordinal, subject in zip(ORDINALS, ap.subjects):
        ap_doc.append(f"{ordinal} AP Subject: {subject.subject}")
        ap_doc.append(f"{ordinal} AP Score: {subject.score}")
        ap_doc.append(f"{ordinal} AP Exam Year: {subject.year}")

    ib = pkg.reports.ib
    ib_doc = [
        "# IB EXAMINATION RESULTS",
        f"Candidate: {t.student}",
        f"IB Candidate ID: {ib.candidate_id}",
        f"IB Session: {ib.session}",
        f"IB Total Points: {ib.total_points}",
    ]
    for ordinal, subject in zip(ORDINALS, ib.subjects):
        ib_doc.append(f"{ordinal} IB Subject: {subject.subject}")
        ib_doc.append(f"{ordinal} IB Subject Points: {subject.score}")

    certificate = [
        "# ACHIEVEMENT CERTIFICATE",
        f"Presented To: {t.student}",
        f"Award Title: {pkg.certificate.award_type} Award",
        f"Award Organization: {pkg.certificate.issuer}",
        f"Award Date: {pkg.certificate.date}",
    ]

    activity = [
        "# ACTIVITY SHEET",
        f"Primary Activity: {pkg.activity.activity_type}",
        f"Activity Involvement Description: {pkg.activity.description}",
    ]

    return [
        ("profile.txt", "\n".join(profile)),
        ("transcript.txt", "\n".join(transcript)),
        ("act_results.txt", "\n".join(act_doc)),
        ("sat_results.txt", "\n".join(sat_doc)),
        ("ap_results.txt", "\n".join(ap_doc)),
        ("ib_results.txt", "\n".join(ib_doc)),
        ("certificate.txt", "\n".join(certificate)),
        ("activity.txt", "\n".join(activity)),
    ]


# Subdirectory per document kind inside one student's output directory.
_DOC_SUBDIRS = {
    "profile.txt": "transcript",
    "transcript.txt": "transcript",
    "act_results.txt": "reports",
    "sat_results.txt": "reports",
    "ap_results.txt": "reports",
    "ib_results.txt": "reports",
    "certificate.txt": "certificates",
    "activity.txt": "activities",
}


def read_seed_csv(path: str | Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write_seed_csv(path: str | Path, rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(SEED_CSV_COLUMNS))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row[k] for k in SEED_CSV_COLUMNS})


def default_seed_rows(n: int, base_seed: int, names: list[dict], schools: list[dict]) -> list[dict]:
    """Deterministic seed rows drawn from the bundled name/school pools.

    (name, school) pairs are kept distinct so each student gets its own
    output directory.
    """
    rng = random.Random(base_seed)
    rows = []
    used: set[tuple[str, str]] = set()
    for _ in range(n):
        for _attempt in range(1000):
            person = names[rng.randrange(len(names))]
            school = schools[rng.randrange(len(schools))]
            key = (f"{person['first']} {person['last']}", school["name"])
            if key not in used:
                used.add(key)
                break
        else:
            raise ValueError("name/school pool exhausted")
        rows.append(
            {
                "legal_name": f"{person['first']} {person['last']}",
                "used_name": person["first"],
                "gender": person["gender"],
                "race": person["race"],
                "ethnicity": person["ethnicity"],
                "languages": person["languages"],
                "school_name": school["name"],
                "school_city": school["city"],
                "school_state": school["state"],
            }
        )
    return rows


@dataclass
class BatchResult:
    packages: list[StudentPackage]
    shortfall: int
    attempts: int


def generate_batch(
    seed_rows: list[dict],
    base_seed: int,
    out_dir: Optional[str | Path] = None,
    max_attempts: int = 3,
    fault_hook: Optional[Callable[[int, int], None]] = None,
) -> BatchResult:
    """Generate, validate, and optionally write one package per seed row.

    Failed attempts (validation failure or a fault_hook exception) are retried
    with a derived rng stream; a package's partial output directory is removed
    before each retry so incomplete packages never survive.
    """
    out_path = Path(out_dir) if out_dir is not None else None
    packages: list[StudentPackage] = []
    attempts_total = 0
    shortfall = 0

    for index, row in enumerate(seed_rows):
        produced = None
        for attempt in range(max_attempts):
            attempts_total += 1
            pkg_dir = None
            try:
                if fault_hook is not None:
                    fault_hook(index, attempt)
                pkg = generate_package(
                    row, rng_seed=base_seed + index * 1009 + attempt * 7919
                )
                if not validate_package(pkg).passed:
                    raise ValueError("package failed validation")
                if out_path is not None:
                    pkg_dir = _student_dir(out_path, pkg)
                    _write_package(pkg_dir, pkg)
                produced = pkg
                break
            except Exception:
                if pkg_dir is not None and pkg_dir.exists():
                    shutil.rmtree(pkg_dir)
                continue
        if produced is None:
            shortfall += 1
        else:
            packages.append(produced)
    return BatchResult(packages=packages, shortfall=shortfall, attempts=attempts_total)


def _sanitize(name: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in name).strip("_").lower()


def _student_dir(out_path: Path, pkg: StudentPackage) -> Path:
    return out_path / _sanitize(pkg.seed.school.name) / _sanitize(pkg.seed.legal_name)


def _write_package(pkg_dir: Path, pkg: StudentPackage) -> None:
    for sub in ("transcript", "reports", "certificates", "activities"):
        (pkg_dir / sub).mkdir(parents=True, exist_ok=True)
    for doc_name, text in render_package_text(pkg):
        (pkg_dir / _DOC_SUBDIRS[doc_name] / doc_name).write_text(text, encoding="utf-8")
    (pkg_dir / "package.json").write_text(
        json.dumps(pkg.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
    )
