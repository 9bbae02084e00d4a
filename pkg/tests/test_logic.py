"""Unit tests for tense_logic.logic."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tense_logic.errors import (
    DslSyntaxError,
    IndexOutOfRange,
    InputError,
    NormalizationBlowUp,
    StrictModeViolation,
    UnknownEvent,
)
from tense_logic.logic import (
    MAX_DISJUNCTS,
    And,
    EventAnd,
    EventName,
    EventNot,
    EventOr,
    FutureAtom,
    History,
    NormalForm,
    Not,
    NowAtom,
    Or,
    check_strict,
    complement_event,
    conj,
    conjoin,
    disj,
    format_proposition,
    instantiate,
    normalize,
    parse,
    parse_template,
    subset_conjunctions,
    tense_of,
)
from tense_logic.model import QuantumModel

# Four experiences, overlapping events: A = {0,1}, B = {1,2}, C = {2,3}.
FOUR_LEVEL = QuantumModel(
    dim_s=4,
    dim_e=1,
    hamiltonian=np.diag([0.0, 1.0, 2.0, 3.0]),
    events={"A": [0, 1], "B": [1, 2], "C": [2, 3], "FULL": [0, 1, 2, 3]},
    initial_experience=0,
    initial_environment=np.array([1.0]),
)

A = EventName("A")
B = EventName("B")
C = EventName("C")


def history(*steps) -> History:
    return History(tuple((t, frozenset(ev)) for t, ev in steps))


def nf_of(text: str) -> NormalForm:
    return normalize(parse(text), FOUR_LEVEL)


event_exprs = st.sampled_from([A, B, C, EventNot(A), EventOr((A, C))])
atoms = st.one_of(
    st.builds(FutureAtom, st.sampled_from([0.5, 1.0, 2.0]), event_exprs),
    st.builds(NowAtom, event_exprs),
)
propositions = st.recursive(
    atoms,
    lambda children: st.one_of(
        st.builds(Not, children),
        st.lists(children, min_size=2, max_size=3).map(lambda cs: And(tuple(cs))),
        st.lists(children, min_size=2, max_size=3).map(lambda cs: Or(tuple(cs))),
    ),
    max_leaves=6,
)


class TestParse:
    """Test the proposition DSL parser."""

    def test_future_atom(self):
        """Test a single future atom."""
        assert parse("F[1.0](A)") == FutureAtom(1.0, A)

    def test_grammar_exercise(self):
        """Test conjunction with a negated disjunctive event."""
        expected = And((FutureAtom(0.5, A), Not(FutureAtom(1.5, EventOr((B, C))))))
        assert parse("F[0.5](A) & ~F[1.5](B | C)") == expected

    def test_and_binds_tighter_than_or(self):
        """Test & binds tighter than |."""
        assert parse("N(A) | N(B) & N(C)") == Or((NowAtom(A), And((NowAtom(B), NowAtom(C)))))

    def test_not_binds_tightest(self):
        """Test ~ applies to the nearest factor only."""
        assert parse("~N(A) & N(B)") == And((Not(NowAtom(A)), NowAtom(B)))
        assert parse("~(N(A) & N(B))") == Not(And((NowAtom(A), NowAtom(B))))

    def test_event_expression_precedence(self):
        """Test event-level precedence mirrors proposition-level precedence."""
        assert parse("N(~A | B & C)") == NowAtom(EventOr((EventNot(A), EventAnd((B, C)))))

    def test_whitespace_insignificant(self):
        """Test whitespace and newlines are ignored."""
        assert parse(" F [ 2 ] ( A )\n&\tN(B) ") == parse("F[2](A)&N(B)")

    def test_exponent_literal(self):
        """Test scientific notation times."""
        assert parse("F[1e-3](A)") == FutureAtom(0.001, A)

    def test_positions_recorded(self):
        """Test atoms remember their source position."""
        prop = parse("N(A) &\n  F[1](B)")
        assert prop.children[1].pos == (2, 3)
        assert prop.children[1].event.pos == (2, 8)

    def test_zero_time_rejected(self):
        """Test F requires a strictly positive time."""
        with pytest.raises(DslSyntaxError, match="F requires t > 0") as excinfo:
            parse("F[0](A)")
        assert (excinfo.value.line, excinfo.value.column) == (1, 3)

    def test_overflowing_time_rejected(self):
        """Test a time literal that overflows to infinity is a syntax error."""
        with pytest.raises(DslSyntaxError, match="finite time") as excinfo:
            parse("F[1e400](A)")
        assert (excinfo.value.line, excinfo.value.column) == (1, 3)
        assert "finite number" in excinfo.value.expected

    def test_truncated_input(self):
        """Test the expected-token set at end of input."""
        with pytest.raises(DslSyntaxError) as excinfo:
            parse("F[1](A) &")
        assert excinfo.value.column == 10
        assert excinfo.value.expected == frozenset({"F", "N", "~", "("})
        assert "expected one of" in str(excinfo.value)

    def test_trailing_token_on_second_line(self):
        """Test line and column tracking across newlines."""
        with pytest.raises(DslSyntaxError) as excinfo:
            parse("N(A) |\n  N(B) )")
        assert (excinfo.value.line, excinfo.value.column) == (2, 8)
        assert excinfo.value.expected == frozenset({"|", "&", "end of input"})

    def test_unexpected_character(self):
        """Test characters outside the alphabet."""
        with pytest.raises(DslSyntaxError, match="Unexpected character") as excinfo:
            parse("N(A) $")
        assert excinfo.value.column == 6

    def test_time_symbol_outside_template(self):
        """Test 't' is not a time outside sweep templates."""
        with pytest.raises(DslSyntaxError) as excinfo:
            parse("F[t](A)")
        assert excinfo.value.expected == frozenset({"number"})

    def test_syntax_error_is_input_error(self):
        """Test parse errors share the input-error base class."""
        with pytest.raises(InputError):
            parse("F(A)")


class TestFormat:
    """Test rendering propositions back to DSL text."""

    def test_float_time_rendering(self):
        """Test times are rendered as float literals."""
        assert format_proposition(parse("F[1](A)")) == "F[1.0](A)"

    def test_round_trip_with_grouping(self):
        """Test parentheses are inserted only where precedence needs them."""
        text = "~(F[0.5](A | ~B) & N(C)) | F[2.0](A & (B | C))"
        prop = parse(text)
        assert format_proposition(prop) == text
        assert parse(format_proposition(prop)) == prop

    def test_constants(self):
        """Test empty conjunction and disjunction render as constants."""
        assert format_proposition(And(())) == "TRUE"
        assert format_proposition(Or(())) == "FALSE"

    def test_history_str(self):
        """Test history rendering."""
        assert str(history((0.0, {0}), (1.0, {0, 1}))) == "N({0}) & F[1.0]({0,1})"
        assert str(History()) == "TRUE"


class TestTemplates:
    """Test sweep templates with a free time symbol."""

    def test_instantiate(self):
        """Test substitution of the time symbol."""
        template = parse_template("F[t](A) & N(B) & F[3](C)")
        assert instantiate(template, 2.0) == parse("F[2.0](A) & N(B) & F[3](C)")

    def test_template_requires_symbol(self):
        """Test a template without 't' is rejected."""
        with pytest.raises(DslSyntaxError, match="no free time symbol"):
            parse_template("F[1](A)")

    def test_instantiate_non_positive(self):
        """Test the substituted time must be positive."""
        with pytest.raises(InputError):
            instantiate(parse_template("F[t](A)"), 0.0)

    def test_uninstantiated_template_not_normalized(self):
        """Test normalization refuses a free time symbol."""
        with pytest.raises(InputError, match="instantiated"):
            normalize(parse_template("F[t](A)"), FOUR_LEVEL)


class TestHistory:
    """Test History construction and conjunction."""

    def test_times_strictly_increasing(self):
        """Test out-of-order steps are refused."""
        with pytest.raises(InputError):
            history((2.0, {0}), (1.0, {1}))
        with pytest.raises(InputError):
            history((1.0, {0}), (1.0, {1}))

    def test_negative_time(self):
        """Test negative times are refused."""
        with pytest.raises(InputError):
            history((-1.0, {0}))

    def test_conjoin_intersects_same_time(self):
        """Test same-time events intersect and steps stay sorted."""
        h1 = history((1.0, {0, 1}))
        h2 = history((0.0, {3}), (1.0, {1, 2}), (2.0, {0}))
        assert conjoin(h1, h2) == history((0.0, {3}), (1.0, {1}), (2.0, {0}))
        assert conjoin(h1, h2) == conjoin(h2, h1)

    def test_empty_event_flag(self):
        """Test detection of the zero projector."""
        assert history((1.0, set()), (2.0, {0})).has_empty_event
        assert not history((1.0, {0})).has_empty_event


class TestNormalize:
    """Test normalization to disjunctions of histories."""

    def test_same_time_conjunction_intersects(self):
        """Test F[1](A) & F[1](B) -> one history with A & B."""
        assert nf_of("F[1](A) & F[1](B)").disjuncts == (history((1.0, {1})),)

    def test_negated_history(self):
        """Test the negation of a history is a disjunction of complemented steps."""
        assert nf_of("~(F[1](A) & F[2](B))").disjuncts == (
            history((1.0, {2, 3})),
            history((2.0, {0, 3})),
        )

    def test_distributivity(self):
        """Test conjunction distributes over disjunction."""
        assert nf_of("(F[1](A) | F[2](B)) & F[3](C)").disjuncts == (
            history((1.0, {0, 1}), (3.0, {2, 3})),
            history((2.0, {1, 2}), (3.0, {2, 3})),
        )

    def test_now_atoms_become_time_zero(self):
        """Test N atoms are time-0 steps."""
        assert nf_of("F[1](B) & N(A)").disjuncts == (history((0.0, {0, 1}), (1.0, {1, 2})),)

    def test_empty_event_histories_dropped(self):
        """Test histories with an empty event vanish from the disjunction."""
        assert nf_of("F[1](A) & F[1](C)").is_false
        assert nf_of("(F[1](A) & F[1](C)) | N(B)").disjuncts == (history((0.0, {1, 2})),)

    def test_cross_time_not_absorbed(self):
        """Test F[1](A) & F[2](A) keeps both steps."""
        assert nf_of("F[1](A) & F[2](A)").disjuncts == (history((1.0, {0, 1}), (2.0, {0, 1})),)

    def test_homomorphism(self):
        """Test F_t(a) | F_t(b) and F_t(a | b) normalize identically."""
        assert nf_of("F[1](A) | F[1](B)") == nf_of("F[1](A | B)")
        assert nf_of("N(A) | N(C)") == nf_of("N(FULL)")

    def test_duplicates_removed(self):
        """Test identical histories appear once."""
        assert len(nf_of("(F[1](A) & F[2](B)) | (F[2](B) & F[1](A))")) == 1

    def test_unknown_event(self):
        """Test unknown names report their position."""
        with pytest.raises(UnknownEvent, match="line 1, column 6"):
            nf_of("F[1](Z)")

    def test_blow_up_guard(self):
        """Test more than MAX_DISJUNCTS disjuncts is refused."""
        factors = [
            disj(FutureAtom(float(2 * k + 1), A), FutureAtom(float(2 * k + 2), B)) for k in range(13)
        ]
        assert 2 ** 12 <= MAX_DISJUNCTS < 2 ** 13
        with pytest.raises(NormalizationBlowUp):
            normalize(conj(*factors), FOUR_LEVEL)

    def test_to_proposition_false(self):
        """Test the empty normal form is the contradiction."""
        assert normalize(NormalForm(()).to_proposition(), FOUR_LEVEL).is_false

    @settings(max_examples=60, deadline=None)
    @given(p=propositions)
    def test_double_negation(self, p):
        """Test ~~p normalizes like p."""
        assert normalize(Not(Not(p)), FOUR_LEVEL) == normalize(p, FOUR_LEVEL)

    @settings(max_examples=60, deadline=None)
    @given(p=propositions, q=propositions)
    def test_de_morgan(self, p, q):
        """Test ~(p & q) and ~p | ~q share a normal form."""
        assert normalize(Not(And((p, q))), FOUR_LEVEL) == normalize(Or((Not(p), Not(q))), FOUR_LEVEL)

    @settings(max_examples=60, deadline=None)
    @given(p=propositions)
    def test_idempotent(self, p):
        """Test normalizing a normal form changes nothing."""
        nf = normalize(p, FOUR_LEVEL)
        assert normalize(nf.to_proposition(), FOUR_LEVEL) == nf


class TestSubsetConjunctions:
    """Test inclusion-exclusion subset enumeration."""

    def test_order_and_merging(self):
        """Test subsets by size then lexicographically, with merged conjunctions."""
        h0 = history((1.0, {0, 1}))
        h1 = history((2.0, {1, 2}))
        h2 = history((1.0, {1, 2}), (3.0, {3}))
        subsets = list(subset_conjunctions(NormalForm((h0, h1, h2))))
        assert [s for s, _ in subsets] == [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)]
        assert subsets[-1][1] == history((1.0, {1}), (2.0, {1, 2}), (3.0, {3}))
        assert subsets[4][1] == conjoin(h0, h2)

    def test_empty(self):
        """Test the empty disjunction has no subsets."""
        assert list(subset_conjunctions(NormalForm(()))) == []


class TestComplementEvent:
    """Test event complements."""

    def test_complements(self, rabi):
        """Test singleton, full and empty events."""
        assert complement_event(frozenset({0}), rabi) == frozenset({1})
        assert complement_event(frozenset({0, 1}), rabi) == frozenset()
        assert complement_event(frozenset(), rabi) == frozenset({0, 1})

    def test_out_of_range(self, rabi):
        """Test indices outside the basis raise."""
        with pytest.raises(IndexOutOfRange):
            complement_event(frozenset({2}), rabi)


class TestStrictMode:
    """Test the single-sublattice restriction."""

    def test_single_tense_accepted(self):
        """Test Boolean structure inside one F_t is allowed."""
        check_strict(parse("F[1](A) | ~F[1](B & ~C)"))
        check_strict(parse("N(A) & ~N(B)"))

    @pytest.mark.parametrize("text", ["N(A) & F[1](B)", "F[1](A) | F[2](A)", "~(F[1](A) & F[1.5](B))"])
    def test_cross_tense_rejected(self, text):
        """Test connectives across tense sublattices are refused."""
        with pytest.raises(StrictModeViolation, match="cross-tense"):
            check_strict(parse(text))

    def test_tense_of(self):
        """Test the tense of single-sublattice propositions."""
        assert tense_of(parse("~F[1](A) | F[1.0](B)")) == ("F", 1.0)
        assert tense_of(parse("N(A)")) == ("N", 0.0)
        assert tense_of(parse("N(A) | F[1](B)")) is None
