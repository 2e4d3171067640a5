import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from siterules.datamodel import ItemClass, NumericBin
from siterules.engine import count_support
from siterules.ingest import (
    DataError,
    GoldenFileError,
    SchemaError,
    bin_numeric,
    parse_golden_rules,
    parse_schema,
    parse_transactions,
    render_transactions_csv,
)

SMALL_SCHEMA = """\
# demo schema
attribute ownership categorical antecedent values: governmental, private, semiprivate
attribute age numeric antecedent bins: 0-10=below10, 11-29=11-29, 30-=above30
facility about_us "About Us page"
facility search "site search"
"""


@pytest.fixture()
def small_schema():
    return parse_schema(SMALL_SCHEMA)


class TestParseSchema:
    def test_categorical_declaration(self, small_schema):
        catalog = small_schema.catalog
        ownership = [it for it in catalog.items if it.attribute == "ownership"]
        assert [it.value for it in ownership] == ["governmental", "private", "semiprivate"]
        assert all(it.item_class is ItemClass.DEMOGRAPHIC for it in ownership)

    def test_facility_sugar(self, small_schema):
        catalog = small_schema.catalog
        assert catalog.item_id("about_us", "yes") == 6
        assert catalog.attribute("about_us").description == "About Us page"

    def test_demographics_precede_facilities(self, small_schema):
        classes = [it.item_class for it in small_schema.catalog.items]
        assert classes == [ItemClass.DEMOGRAPHIC] * 6 + [ItemClass.FACILITY] * 2

    def test_empty_file(self):
        with pytest.raises(SchemaError, match="no attributes declared"):
            parse_schema("# nothing here\n\n")

    def test_duplicate_attribute(self):
        text = 'facility x "a"\nfacility x "b"\n'
        with pytest.raises(SchemaError, match="line 2: duplicate attribute"):
            parse_schema(text)

    def test_unknown_class_keyword(self):
        with pytest.raises(SchemaError, match="unknown class keyword"):
            parse_schema("attribute a categorical sideways values: x, y\n")

    def test_unknown_kind(self):
        with pytest.raises(SchemaError, match="unknown attribute kind"):
            parse_schema("attribute a fuzzy antecedent values: x\n")

    def test_overlapping_bins(self):
        with pytest.raises(SchemaError, match="non-overlapping"):
            parse_schema("attribute a numeric antecedent bins: 0-10=x, 10-20=y\n")

    def test_open_bin_must_be_last(self):
        with pytest.raises(SchemaError, match="non-overlapping"):
            parse_schema("attribute a numeric antecedent bins: 0-=x, 5-9=y\n")

    def test_malformed_bin(self):
        with pytest.raises(SchemaError, match="malformed bin"):
            parse_schema("attribute a numeric antecedent bins: ten-20=x\n")

    def test_syntax_error_carries_line_number(self):
        with pytest.raises(SchemaError, match="line 2"):
            parse_schema("facility ok \"fine\"\nattribute broken\n")


BINS = (NumericBin(0, 10, "below10"), NumericBin(11, 29, "11-29"), NumericBin(30, None, "above30"))


class TestBinNumeric:
    @pytest.mark.parametrize(
        "value,label",
        [(5, "below10"), (0, "below10"), (10, "below10"), (11, "11-29"),
         (29, "11-29"), (30, "above30"), (95, "above30")],
    )
    def test_boundaries(self, value, label):
        assert bin_numeric(value, BINS) == label

    def test_fraction_between_bins_errors(self):
        with pytest.raises(ValueError, match="falls in no bin"):
            bin_numeric(10.5, BINS)

    def test_negative_errors(self):
        with pytest.raises(ValueError, match="falls in no bin"):
            bin_numeric(-3, BINS)


def rows_to_csv(rows):
    header = "record_id,ownership,age,about_us,search"
    return "\n".join([header] + rows) + "\n"


class TestParseTransactions:
    def test_membership(self, small_schema):
        db = parse_transactions(small_schema, rows_to_csv(["c1,governmental,25,Y,n"]))
        catalog = small_schema.catalog
        txn = db.transactions[0]
        assert txn.contains(catalog.item_id("ownership", "governmental"))
        assert txn.contains(catalog.item_id("age", "11-29"))
        assert txn.contains(catalog.item_id("about_us", "yes"))
        assert not txn.contains(catalog.item_id("search", "yes"))

    def test_all_empty_facilities_excluded(self, small_schema):
        rows = [f"c{k},private,5,Y,N" for k in range(91)]
        rows += [f"x{k},,," + "," for k in range(9)]
        db = parse_transactions(small_schema, rows_to_csv(rows))
        assert db.size == 91
        assert db.excluded_count == 9

    def test_zero_rows(self, small_schema):
        db = parse_transactions(small_schema, rows_to_csv([]))
        assert db.size == 0
        assert db.excluded_count == 0

    def test_header_order_insensitive(self, small_schema):
        text = "record_id,search,about_us,age,ownership\nc1,N,Y,40,private\n"
        db = parse_transactions(small_schema, text)
        assert db.transactions[0].contains(small_schema.catalog.item_id("age", "above30"))

    def test_unknown_column(self, small_schema):
        text = "record_id,ownership,age,about_us,search,bogus\nc1,private,5,Y,N,x\n"
        with pytest.raises(DataError, match="unknown column"):
            parse_transactions(small_schema, text)

    def test_missing_column(self, small_schema):
        text = "record_id,ownership,age,about_us\nc1,private,5,Y\n"
        with pytest.raises(DataError, match="missing columns: search"):
            parse_transactions(small_schema, text)

    def test_duplicate_record_id(self, small_schema):
        with pytest.raises(DataError, match="duplicate record_id"):
            parse_transactions(
                small_schema, rows_to_csv(["c1,private,5,Y,N", "c1,private,6,Y,N"])
            )

    def test_partial_facility_row_rejected(self, small_schema):
        with pytest.raises(DataError, match="all present or all empty"):
            parse_transactions(small_schema, rows_to_csv(["c1,private,5,Y,"]))

    def test_unknown_categorical_value(self, small_schema):
        with pytest.raises(DataError, match="not in schema"):
            parse_transactions(small_schema, rows_to_csv(["c1,communal,5,Y,N"]))

    def test_empty_demographic_cell_rejected(self, small_schema):
        with pytest.raises(DataError, match="empty value"):
            parse_transactions(small_schema, rows_to_csv(["c1,,5,Y,N"]))

    def test_unparseable_number(self, small_schema):
        with pytest.raises(DataError, match="unparseable integer"):
            parse_transactions(small_schema, rows_to_csv(["c1,private,old,Y,N"]))

    def test_unbinnable_number(self, small_schema):
        with pytest.raises(DataError, match="falls in no bin"):
            parse_transactions(small_schema, rows_to_csv(["c1,private,-4,Y,N"]))

    def test_bad_token(self, small_schema):
        with pytest.raises(DataError, match="yes/no token"):
            parse_transactions(small_schema, rows_to_csv(["c1,private,5,maybe,N"]))

    def test_token_variants(self, small_schema):
        db = parse_transactions(
            small_schema, rows_to_csv(["c1,private,5,YES,0", "c2,private,5,1,no"])
        )
        about = small_schema.catalog.item_id("about_us", "yes")
        assert [t.contains(about) for t in db.transactions] == [True, True]

    def test_row_order_permutes_transactions_not_counts(self, small_schema):
        rows = ["c1,governmental,5,Y,N", "c2,private,25,N,Y", "c3,semiprivate,40,Y,Y"]
        db_a = parse_transactions(small_schema, rows_to_csv(rows))
        db_b = parse_transactions(small_schema, rows_to_csv(rows[::-1]))
        by_id_a = {t.record_id: t.members for t in db_a.transactions}
        by_id_b = {t.record_id: t.members for t in db_b.transactions}
        assert by_id_a == by_id_b
        for i in range(small_schema.catalog.n_items):
            assert count_support(db_a, (i,)) == count_support(db_b, (i,))


@st.composite
def random_rows(draw):
    n = draw(st.integers(0, 25))
    rows = []
    for k in range(n):
        ownership = draw(st.sampled_from(["governmental", "private", "semiprivate"]))
        age = draw(st.integers(0, 60))
        about = draw(st.sampled_from(["Y", "N"]))
        search = draw(st.sampled_from(["Y", "N"]))
        rows.append(f"r{k},{ownership},{age},{about},{search}")
    excluded = draw(st.integers(0, 4))
    rows += [f"gone{k},,,," for k in range(excluded)]
    return rows


class TestRoundTrip:
    @given(random_rows())
    @settings(max_examples=60, deadline=None)
    def test_serialize_then_parse_is_identity(self, rows):
        schema = parse_schema(SMALL_SCHEMA)
        db = parse_transactions(schema, rows_to_csv(rows))
        again = parse_transactions(schema, render_transactions_csv(db))
        assert again.size == db.size
        assert again.excluded_count == db.excluded_count
        assert [t.members for t in again.transactions] == [t.members for t in db.transactions]
        assert [t.record_id for t in again.transactions] == [t.record_id for t in db.transactions]
        assert again.vertical_index == db.vertical_index


GOLDEN_HEADER = "rule_id,antecedent,consequent,confidence_pct,support_pct"


class TestParseGoldenRules:
    def test_examples(self):
        text = "\n".join(
            [
                GOLDEN_HEADER,
                "1,age=below10,facility=about_us,100.00,12.08",
                "21,ownership=governmental,facility=about_us,97.95,53.84",
            ]
        )
        one, twentyone = parse_golden_rules(text)
        assert one.antecedent_items == (("age", "below10"),)
        assert one.consequent_item == ("facility", "about_us")
        assert one.confidence_bp == 10_000
        assert one.support_bp == 1208
        assert twentyone.rule_id == 21
        assert twentyone.confidence_bp == 9795

    def test_two_item_antecedent(self):
        text = GOLDEN_HEADER + "\n8,age=above30 AND ownership=private,facility=contact_us,100,12.08"
        (rule,) = parse_golden_rules(text)
        assert rule.antecedent_items == (("age", "above30"), ("ownership", "private"))
        assert rule.confidence_bp == 10_000

    def test_confidence_below_90_rejected(self):
        text = GOLDEN_HEADER + "\n1,age=below10,facility=about_us,89.00,12.08"
        with pytest.raises(GoldenFileError, match="confidence below 90"):
            parse_golden_rules(text)

    def test_confidence_above_100_rejected(self):
        text = GOLDEN_HEADER + "\n1,age=below10,facility=about_us,101.00,12.08"
        with pytest.raises(GoldenFileError, match="confidence above 100"):
            parse_golden_rules(text)

    def test_malformed_antecedent(self):
        text = GOLDEN_HEADER + "\n1,below10,facility=about_us,100.00,12.08"
        with pytest.raises(GoldenFileError, match="malformed item"):
            parse_golden_rules(text)

    def test_zero_support_rejected(self):
        text = GOLDEN_HEADER + "\n1,age=below10,facility=about_us,100.00,0.00"
        with pytest.raises(GoldenFileError, match="support out of range"):
            parse_golden_rules(text)

    def test_bad_header(self):
        with pytest.raises(GoldenFileError, match="expected header"):
            parse_golden_rules("a,b,c\n")

    def test_duplicate_rule_id(self):
        text = "\n".join(
            [
                GOLDEN_HEADER,
                "1,age=below10,facility=about_us,100.00,12.08",
                "1,age=below10,facility=search,100.00,12.08",
            ]
        )
        with pytest.raises(GoldenFileError, match="duplicate rule_id"):
            parse_golden_rules(text)

    def test_packaged_file_has_68_rules(self, golden):
        assert len(golden) == 68
        assert [g.rule_id for g in golden] == list(range(1, 69))
