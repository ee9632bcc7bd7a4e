import itertools

import pytest

from fgacsql.errors import Uncompilable
from fgacsql.harness import database_from_scenario, evaluate_condition
from fgacsql.ocl import BoolLit, ObjectRef, eval_ocl, parse_bool_ocl
from fgacsql.ocl2sql import map_ocl_to_sql
from fgacsql.sql.parser import parse_sql_condition

from .helpers import scenario

CALLER_ONLY = {"caller": "Lecturer"}
CALLER_SELF = {"caller": "Lecturer", "self": "Student"}
ENROLMENT_KW = {"caller": "Lecturer", "lecturers": "Lecturer", "students": "Student"}


def test_registry_hit_is_verbatim(university, registry):
    e = parse_bool_ocl(
        "Lecturer.allInstances()->select(l|l.age > caller.age)->isEmpty()",
        university,
        CALLER_ONLY,
    )
    impl = map_ocl_to_sql(e, registry)
    assert impl.origin == "Manual"
    assert impl.sql_body == (
        "(SELECT MAX(age) FROM Lecturer) = (SELECT age FROM Lecturer WHERE Lecturer_id = caller)"
    )


def test_registry_hit_enrolment(university, registry):
    e = parse_bool_ocl(
        "(caller = lecturers) or (caller.students->exists(s|s = students))",
        university,
        ENROLMENT_KW,
    )
    impl = map_ocl_to_sql(e, registry)
    assert impl.origin == "Manual"
    assert impl.sql_body.startswith("(caller = lecturers) OR")


def test_fallback_constant_true():
    impl = map_ocl_to_sql(BoolLit(True), None)
    assert impl.origin == "Generated" and impl.sql_body == "TRUE"


def test_fallback_compiles_exists(university):
    e = parse_bool_ocl("caller.students->exists(s|s = self)", university, CALLER_SELF)
    impl = map_ocl_to_sql(e, None)
    assert impl.origin == "Generated"
    assert "EXISTS" in impl.sql_body and "Enrolment" in impl.sql_body


def test_fallback_rejects_unsupported(university):
    e = parse_bool_ocl(
        "Student.allInstances()->forAll(s|s.lecturers->includes(caller))",
        university,
        CALLER_ONLY,
    )
    with pytest.raises(Uncompilable):
        map_ocl_to_sql(e, None)


def _grid():
    base = {"L1": 40, "L2": 35, "L3": 40}
    students = {"S1": 20, "S2": 17}
    pair_space = [(l, s) for l in base for s in students]
    for bits in range(0, 1 << len(pair_space), 7):  # sampled link subsets
        links = [p for i, p in enumerate(pair_space) if bits & (1 << i)]
        yield scenario(base, students, links)


def _truth_agreement(university, constraint_text, keywords, registry, binding_space):
    e = parse_bool_ocl(constraint_text, university, keywords)
    impl = map_ocl_to_sql(e, registry)
    params = frozenset(["caller", *keywords]) - {""}
    condition = parse_sql_condition(impl.sql_body, params)
    for sc in _grid():
        db = database_from_scenario(university, sc)
        for binding in binding_space(sc):
            expected = eval_ocl(sc, e, binding) is True
            values = {name: ref.object_id for name, ref in binding.items()}
            actual = evaluate_condition(db, condition, values) is True
            assert actual == expected, (constraint_text, binding, sc.links)


def test_correct_implementation_registry_age(university, registry):
    def bindings(sc):
        for caller, student in itertools.product(sc.object_ids("Lecturer"), sc.object_ids("Student")):
            yield {"caller": ObjectRef(caller, "Lecturer"), "self": ObjectRef(student, "Student")}

    _truth_agreement(
        university, "caller.students->exists(s|s = self)", CALLER_SELF, registry, bindings
    )


def test_correct_implementation_registry_oldest(university, registry):
    def bindings(sc):
        for caller in sc.object_ids("Lecturer"):
            yield {"caller": ObjectRef(caller, "Lecturer")}

    _truth_agreement(
        university,
        "Lecturer.allInstances()->select(l|l.age > caller.age)->isEmpty()",
        CALLER_ONLY,
        registry,
        bindings,
    )


def test_correct_implementation_registry_enrolment(university, registry):
    def bindings(sc):
        for caller, lect, stud in itertools.product(
            sc.object_ids("Lecturer"), sc.object_ids("Lecturer"), sc.object_ids("Student")
        ):
            yield {
                "caller": ObjectRef(caller, "Lecturer"),
                "lecturers": ObjectRef(lect, "Lecturer"),
                "students": ObjectRef(stud, "Student"),
            }

    _truth_agreement(
        university,
        "(caller = lecturers) or (caller.students->exists(s|s = students))",
        ENROLMENT_KW,
        registry,
        bindings,
    )


def test_fallback_agrees_with_manual(university, registry):
    """Where both routes exist their harness truth values coincide."""
    texts = [
        ("caller.students->exists(s|s = self)", CALLER_SELF),
        ("Lecturer.allInstances()->select(l|l.age > caller.age)->isEmpty()", CALLER_ONLY),
        ("(caller = lecturers) or (caller.students->exists(s|s = students))", ENROLMENT_KW),
    ]
    for text, keywords in texts:
        e = parse_bool_ocl(text, university, keywords)
        manual = map_ocl_to_sql(e, registry)
        generated = map_ocl_to_sql(e, None)
        assert manual.origin == "Manual" and generated.origin == "Generated"
        params = frozenset(["caller", *keywords])
        manual_cond = parse_sql_condition(manual.sql_body, params)
        generated_cond = parse_sql_condition(generated.sql_body, params)
        for sc in _grid():
            db = database_from_scenario(university, sc)
            lecturers = sc.object_ids("Lecturer")
            students = sc.object_ids("Student")
            for caller in lecturers:
                values = {"caller": caller}
                if "self" in keywords:
                    values["self"] = students[0]
                if "lecturers" in keywords:
                    values["lecturers"] = lecturers[-1]
                    values["students"] = students[0]
                assert (evaluate_condition(db, manual_cond, values) is True) == (
                    evaluate_condition(db, generated_cond, values) is True
                )
