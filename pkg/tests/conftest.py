import numpy as np
import pytest

from fuzzysum import datasets
from fuzzysum.lattice import FuzzyContext

EMPLOYEE_DDL = """CREATE TABLE EMPLOYEE (
  ID# VARCHAR(4) NOT NULL,
  NAME VARCHAR(20) NOT NULL,
  SURNAME VARCHAR(20) NOT NULL,
  ADDRESS VARCHAR(40) NOT NULL,
  AGE FTYPE2(5,10) NUMBER(3) DEFAULT UNKNOWN
  NOT NULL,
  SALARY FTYPE1(10,50) NUMBER(7) NOT NULL,
  PRODUCTIVITY FTYPE3(1) NOT NULL,
  PRIMARY KEY (ID#));
"""

# Six records over salary descriptors (miserable, modest, comfortable) and age
# descriptors (young, adult). Row supports are chosen so the closed intents come
# out graded 1/4/4/4/2/1 over levels 0..5, and degrees so the {modest, young}
# extent is {t1: 0.5, t5: 0.5, t6: 0.5}.
SIX_RECORD_ROWS = {
    "t1": {"modest": 0.5, "comfortable": 0.4, "young": 0.6, "adult": 0.5},
    "t2": {"miserable": 0.3, "modest": 0.6, "adult": 0.6},
    "t3": {"miserable": 0.7, "young": 0.7},
    "t4": {"modest": 0.5, "comfortable": 0.5, "adult": 0.8},
    "t5": {"modest": 0.5, "comfortable": 0.4, "young": 0.6},
    "t6": {"miserable": 0.5, "modest": 0.5, "young": 0.5, "adult": 0.5},
}
SIX_RECORD_DESCRIPTORS = ["miserable", "modest", "comfortable", "young", "adult"]
SIX_RECORD_GROUPS = ("SALARY", "SALARY", "SALARY", "AGE", "AGE")


def six_record_context() -> FuzzyContext:
    base = FuzzyContext.from_mapping(SIX_RECORD_ROWS, SIX_RECORD_DESCRIPTORS)
    return FuzzyContext(base.objects, base.attributes, base.incidence, SIX_RECORD_GROUPS)


@pytest.fixture
def six_ctx():
    return six_record_context()


@pytest.fixture
def employee_catalog():
    return datasets.employee_catalog()


@pytest.fixture
def personal_catalog():
    return datasets.personal_catalog()


def random_context(rng: np.random.Generator, max_objects=8, max_attrs=6, levels=(0, 0.25, 0.5, 0.75, 1)):
    n = int(rng.integers(1, max_objects + 1))
    m = int(rng.integers(1, max_attrs + 1))
    inc = rng.choice(np.array(levels, dtype=float), size=(n, m))
    return FuzzyContext(
        tuple(f"t{i + 1}" for i in range(n)), tuple(f"m{j + 1}" for j in range(m)), inc
    )


def three_clouds(seed=0, per_cloud=20, spread=0.05):
    rng = np.random.default_rng(seed)
    centres = np.array([[0.0, 0.0], [5.0, 5.0], [10.0, 0.0]])
    pts = np.vstack([c + rng.normal(0, spread, size=(per_cloud, 2)) for c in centres])
    truth = np.repeat(np.arange(3), per_cloud)
    return pts, truth
