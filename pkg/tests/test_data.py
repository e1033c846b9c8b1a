import numpy as np
import pytest
from scipy import sparse

from privlsh import (
    EmptyDatasetError,
    EventRecord,
    InvalidParamsError,
    ParseError,
    SynthSpec,
    angular_distance,
    build_vectors,
    exact_knn,
    load_events,
    synthesize,
    truncate_dimensions,
)


class TestLoadEvents:
    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        assert load_events(path) == []

    def test_single_line(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text("u1,5,3.0\n")
        assert load_events(path) == [EventRecord("u1", 5, 3.0)]

    def test_tsv(self, tmp_path):
        path = tmp_path / "one.tsv"
        path.write_text("u1\t5\t3.0\n")
        assert load_events(path, fmt="tsv") == [EventRecord("u1", 5, 3.0)]

    def test_header_skipped(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("user_id,item_index,value\nu1,0,1.5\n")
        assert load_events(path, header=True) == [EventRecord("u1", 0, 1.5)]

    def test_out_of_range_index_is_parse_error(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("u1,4,1.0\n")
        with pytest.raises(ParseError) as err:
            load_events(path, n_items=4)
        assert err.value.line == 1

    def test_malformed_line_reports_number(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("u1,0,1.0\nu2,zero,1.0\n")
        with pytest.raises(ParseError) as err:
            load_events(path)
        assert err.value.line == 2

    def test_wrong_field_count(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("u1,0\n")
        with pytest.raises(ParseError):
            load_events(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_events(tmp_path / "nope.csv")


class TestBuildVectors:
    def test_rating_centered_example(self):
        # ratings {a: 5, b: 3} center to (+1, -1) at their indices
        events = [EventRecord("u1", 0, 5.0), EventRecord("u1", 1, 3.0)]
        ds = build_vectors(events, n_items=4, mode="rating_centered")
        row = np.asarray(ds.row("u1").todense()).ravel()
        assert np.allclose(row, [1.0, -1.0, 0.0, 0.0])

    def test_single_rating_user_dropped(self):
        events = [
            EventRecord("solo", 0, 5.0),
            EventRecord("keep", 0, 5.0),
            EventRecord("keep", 1, 3.0),
        ]
        with pytest.warns(RuntimeWarning, match="solo"):
            ds = build_vectors(events, n_items=4)
        assert ds.ids == ["keep"]

    def test_all_users_dropped_raises(self):
        with pytest.warns(RuntimeWarning):
            with pytest.raises(EmptyDatasetError):
                build_vectors([EventRecord("solo", 0, 5.0)], n_items=2)

    def test_duplicate_last_write_wins(self):
        events = [EventRecord("u1", 3, 2.0), EventRecord("u1", 3, 1.0)]
        ds = build_vectors(events, n_items=5, mode="raw_counts")
        assert ds.row("u1")[0, 3] == 1.0

    def test_raw_counts_keeps_values(self):
        events = [EventRecord("u1", 0, 7.0), EventRecord("u1", 2, 1.0)]
        ds = build_vectors(events, n_items=3, mode="raw_counts")
        assert np.allclose(np.asarray(ds.row("u1").todense()).ravel(), [7.0, 0.0, 1.0])

    def test_centered_rows_have_zero_mean_over_rated(self):
        rng = np.random.default_rng(60)
        events = []
        for u in range(20):
            items = rng.choice(30, size=rng.integers(2, 10), replace=False)
            for i in items:
                events.append(EventRecord(f"u{u:02d}", int(i), float(rng.uniform(1.0, 5.0))))
        ds = build_vectors(events, n_items=30, mode="rating_centered")
        X = ds.matrix
        for r in range(X.shape[0]):
            row = X.getrow(r)
            # rated items = union of nonzero after centering and the ones
            # centered to zero; the sum over rated items is the row sum
            assert abs(row.sum()) < 1e-9

    def test_users_sorted_by_id(self):
        events = [EventRecord("zz", 0, 1.0), EventRecord("aa", 1, 2.0)]
        ds = build_vectors(events, n_items=2, mode="raw_counts")
        assert ds.ids == ["aa", "zz"]

    def test_bad_mode(self):
        with pytest.raises(InvalidParamsError):
            build_vectors([EventRecord("u", 0, 1.0)], n_items=1, mode="other")


class TestTruncateDimensions:
    def _dataset(self):
        events = [
            EventRecord("u1", 0, 1.0),
            EventRecord("u2", 0, 2.0),
            EventRecord("u3", 0, 3.0),
            EventRecord("u1", 1, 4.0),
            EventRecord("u4", 2, 5.0),
        ]
        return build_vectors(events, n_items=4, mode="raw_counts")

    def test_identity_when_keeping_all(self):
        ds = self._dataset()
        out = truncate_dimensions(ds, 4)
        assert out.ids == ds.ids
        assert np.allclose(out.matrix.toarray(), ds.matrix.toarray())

    def test_keeps_highest_support(self):
        ds = self._dataset()  # supports: item0 -> 3, item1 -> 1, item2 -> 1
        with pytest.warns(RuntimeWarning):
            out = truncate_dimensions(ds, 1)
        assert out.dim == 1
        assert set(out.ids) == {"u1", "u2", "u3"}  # u4 had only item2

    def test_support_ordering_oracle(self):
        rng = np.random.default_rng(61)
        dense = (rng.random((200, 50)) < 0.08).astype(float) * rng.integers(1, 5, (200, 50))
        dense[:, 0] = 1.0  # keep every user alive
        ds_ids = [f"u{i:03d}" for i in range(200)]
        from privlsh import Dataset

        ds = Dataset(ids=ds_ids, matrix=sparse.csr_matrix(dense))
        support = (dense != 0).sum(axis=0)
        out = truncate_dimensions(ds, 10)
        kept_mask = np.zeros(50, dtype=bool)
        # recover kept columns by matching column patterns
        sub = out.matrix.toarray()
        full = ds.matrix.toarray()
        kept_cols = []
        for j in range(sub.shape[1]):
            matches = [c for c in range(50) if not kept_mask[c] and np.array_equal(full[:, c], sub[:, j])]
            kept_cols.append(matches[0])
            kept_mask[matches[0]] = True
        dropped_cols = [c for c in range(50) if c not in kept_cols]
        assert min(support[kept_cols]) >= max(support[dropped_cols])

    def test_never_increases_nonzero_count(self):
        ds = self._dataset()
        before = {uid: ds.row(uid).getnnz() for uid in ds.ids}
        with pytest.warns(RuntimeWarning):
            out = truncate_dimensions(ds, 2)
        for uid in out.ids:
            assert out.row(uid).getnnz() <= before[uid]

    def test_invalid_n_keep(self):
        ds = self._dataset()
        with pytest.raises(InvalidParamsError):
            truncate_dimensions(ds, 0)
        with pytest.raises(InvalidParamsError):
            truncate_dimensions(ds, 5)


class TestSynthesize:
    def test_deterministic(self):
        spec = SynthSpec(dim=30, clusters=3, users_per_cluster=4, spread=0.05, seed=77)
        a, b = synthesize(spec), synthesize(spec)
        assert a.ids == b.ids
        assert np.array_equal(a.matrix, b.matrix)

    def test_single_cluster_is_tight(self):
        ds = synthesize(SynthSpec(dim=50, clusters=1, users_per_cluster=10, spread=0.05, seed=5))
        for i in range(len(ds)):
            for j in range(i + 1, len(ds)):
                assert angular_distance(ds.matrix[i], ds.matrix[j]) <= 0.1 + 0.02

    def test_two_clusters_are_far(self):
        ds = synthesize(SynthSpec(dim=100, clusters=2, users_per_cluster=5, spread=0.05, seed=6))
        first = [i for i, uid in enumerate(ds.ids) if uid.startswith("c000")]
        second = [i for i, uid in enumerate(ds.ids) if uid.startswith("c001")]
        for i in first:
            for j in second:
                assert angular_distance(ds.matrix[i], ds.matrix[j]) >= 0.3

    def test_members_sit_at_spread_from_center(self):
        spread = 0.07
        ds = synthesize(SynthSpec(dim=20, clusters=2, users_per_cluster=3, spread=spread, seed=8))
        # all members of a cluster are at pairwise distance <= 2 * spread
        first = [i for i, uid in enumerate(ds.ids) if uid.startswith("c000")]
        for i in first:
            for j in first:
                assert angular_distance(ds.matrix[i], ds.matrix[j]) <= 2 * spread + 1e-9 if i != j else True

    def test_nearest_neighbors_concentrate_below_point_one(self):
        ds = synthesize(SynthSpec(dim=60, clusters=4, users_per_cluster=8, spread=0.04, seed=9))
        for uid in ds.ids:
            assert exact_knn(ds, uid, 1).distances[0] <= 0.1

    def test_infeasible_cluster_count(self):
        with pytest.raises(InvalidParamsError):
            synthesize(SynthSpec(dim=2, clusters=8, users_per_cluster=1, spread=0.05, seed=1))

    @pytest.mark.parametrize("bad", [0.0, 0.5, -0.1])
    def test_invalid_spread(self, bad):
        with pytest.raises(InvalidParamsError):
            SynthSpec(dim=10, clusters=1, users_per_cluster=1, spread=bad, seed=0)
