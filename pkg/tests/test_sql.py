import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fgacsql.errors import SqlSyntaxError, UnknownColumn, UnsupportedFeature
from fgacsql.sql import (
    AggCall,
    AssocAccess,
    AttrAccess,
    ColumnRef,
    Comparison,
    IntLit,
    Join,
    Param,
    SelectItem,
    SelectQuery,
    Star,
    StrLit,
    SubqueryRef,
    TableRef,
    parse_select,
    parse_sql_condition,
    render_sql,
    resource_accesses,
)

from .conftest import query_text


def test_parse_query1():
    q = parse_select(query_text("q1"))
    assert q.items == (SelectItem(ColumnRef(None, "email")),)
    assert q.from_items == (TableRef("Lecturer"),)
    assert q.where == Comparison("=", ColumnRef(None, "Lecturer_id"), StrLit("Huong"))


def test_parse_query3_nested_shape():
    q = parse_select(query_text("q3"))
    assert q.distinct
    assert len(q.joins) == 1
    middle = q.joins[0].item
    assert isinstance(middle, SubqueryRef) and middle.alias == "TEMP"
    inner_join = middle.query.joins[0].item
    assert isinstance(inner_join, SubqueryRef)
    assert inner_join.query.from_items == (TableRef("Enrolment"),)


def test_parse_query6_caller_param():
    q = parse_select(query_text("q6"))
    sub = q.joins[0].item
    assert sub.query.where == Comparison("=", ColumnRef(None, "lecturers"), Param("caller"))


def test_group_by_is_unsupported():
    with pytest.raises(UnsupportedFeature):
        parse_select("SELECT * FROM t GROUP BY x")


def test_left_join_is_unsupported():
    with pytest.raises(UnsupportedFeature):
        parse_select("SELECT * FROM a LEFT JOIN b ON a.x = b.x")


def test_syntax_error_position():
    with pytest.raises(SqlSyntaxError):
        parse_select("SELECT FROM WHERE")


@pytest.mark.parametrize("name", ["q1", "q2", "q3", "q4", "q5", "q6"])
def test_paper_queries_roundtrip(name):
    q = parse_select(query_text(name))
    assert parse_select(render_sql(q)) == q


def test_render_query4_text():
    q = parse_select(query_text("q4"))
    assert render_sql(q) == "SELECT COUNT(*) FROM Student WHERE age > 18"


def test_render_caller_as_bare_identifier():
    q = parse_select("SELECT * FROM Enrolment WHERE lecturers = caller")
    assert "caller" in render_sql(q).split()


def test_parse_condition_registry_body():
    cond = parse_sql_condition(
        "(caller = lecturers) OR (EXISTS (SELECT 1 FROM Enrolment e "
        "WHERE e.lecturers = caller AND e.students = students))",
        frozenset({"caller", "lecturers", "students"}),
    )
    assert cond is not None


# -- randomized subset ASTs round-trip ---------------------------------------

_names = st.sampled_from(["Student", "Lecturer", "Enrolment", "t1", "t2"])
_cols = st.sampled_from(["age", "email", "name", "lecturers", "students", "Student_id"])


def _operand():
    return st.one_of(
        st.builds(IntLit, st.integers(0, 99)),
        st.builds(StrLit, st.text(alphabet="abcXYZ", min_size=0, max_size=5)),
        st.builds(ColumnRef, st.none() | _names, _cols),
        st.just(Param("caller")),
    )


def _where(depth: int):
    comparison = st.builds(
        Comparison, st.sampled_from(["=", "<>", "<", ">", "<=", ">="]), _operand(), _operand()
    )
    if depth == 0:
        return comparison
    sub = _where(depth - 1)
    from fgacsql.sql import And, Not, Or

    return st.one_of(comparison, st.builds(And, sub, sub), st.builds(Or, sub, sub), st.builds(Not, sub))


def _query(depth: int = 1):
    items = st.one_of(
        st.just((SelectItem(Star()),)),
        st.just((SelectItem(AggCall("COUNT", None)),)),
        st.lists(
            st.builds(SelectItem, st.builds(ColumnRef, st.none() | _names, _cols), st.none() | st.sampled_from(["a", "b"])),
            min_size=1,
            max_size=3,
        ).map(tuple),
    )
    def build(items, n_from, where, distinct):
        return SelectQuery(
            items=items,
            from_items=tuple(TableRef(t) for t in n_from),
            where=where,
            distinct=distinct,
        )

    return st.builds(
        build,
        items,
        st.lists(_names, min_size=1, max_size=2),
        st.none() | _where(depth),
        st.booleans(),
    )


@settings(max_examples=150, deadline=None)
@given(q=_query())
def test_random_ast_roundtrip(q):
    assert parse_select(render_sql(q)) == q


# -- resource accesses ---------------------------------------------------------

def test_accesses_query4(university):
    q = parse_select(query_text("q4"))
    assert resource_accesses(q, university) == [AttrAccess("Student", "age", "Student")]


def test_accesses_query5(university):
    q = parse_select(query_text("q5"))
    assert resource_accesses(q, university) == [
        AssocAccess("Enrolment", "Lecturer", "Student")
    ]


def test_accesses_query6(university):
    q = parse_select(query_text("q6"))
    accesses = resource_accesses(q, university)
    assert accesses == [
        AssocAccess("Enrolment", "Lecturer", "Student"),
        AttrAccess("Student", "age", "Student"),
    ]


def test_accesses_query3_two_association_reads(university):
    q = parse_select(query_text("q3"))
    assocs = [a for a in resource_accesses(q, university) if isinstance(a, AssocAccess)]
    assert len(assocs) == 2


def test_id_columns_are_not_resources(university):
    q = parse_select("SELECT Lecturer_id FROM Lecturer")
    assert resource_accesses(q, university) == []


def test_unknown_column_detected(university):
    q = parse_select("SELECT nosuch FROM Lecturer")
    with pytest.raises(UnknownColumn):
        resource_accesses(q, university)


@pytest.mark.parametrize("name", ["q1", "q2", "q3", "q4", "q5", "q6"])
def test_accesses_are_exhaustive(university, name):
    """Executing the query touches no protected resource outside the
    declared access list (instrumented engine run)."""
    from fgacsql.harness import database_from_scenario, exec_query
    from .helpers import scenario

    sc = scenario(
        {"Huong": 40, "Manuel": 35},
        {"Thanh": 20, "An": 17},
        [("Huong", "Thanh"), ("Manuel", "Thanh"), ("Huong", "An")],
    )
    db = database_from_scenario(university, sc)
    q = parse_select(query_text(name))
    accesses = resource_accesses(q, university)
    declared_attrs = {(a.cls, a.attribute) for a in accesses if isinstance(a, AttrAccess)}
    declared_assocs = {a.association for a in accesses if isinstance(a, AssocAccess)}

    log: set = set()
    result = exec_query(db, q, params={"caller": "Huong"}, read_log=log)
    assert result.is_rows

    class_names = {c.name for c in university.classes}
    for source, column in log:
        if source in class_names:
            cls = university.class_named(source)
            if column == cls.id_column():
                continue  # id columns are not protected resources
            assert (source, column) in declared_attrs, (source, column)
        elif university.association_named(source) is not None:
            assert source in declared_assocs, source
