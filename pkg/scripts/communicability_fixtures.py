"""Analyze the shipped session fixtures and print both method x reader grids.

    python scripts/communicability_fixtures.py
"""
from srauth import presets
from srauth.ingest import load_session, load_workflow
from srauth.issues import analyze
from srauth.report import communicability_cells, comprehensibility_cells, render_method_reader_matrix


def main():
    cat, profs = presets.catalog(), presets.profiles()
    wfs = {w.id: w for w in (load_workflow(p, cat) for p in sorted(presets.FIXTURE_WORKFLOWS.glob("*.json")))}
    reports = []
    for p in sorted(presets.FIXTURE_SESSIONS.glob("*.json")):
        s = load_session(p)
        reports.append(analyze(s, wfs[s.workflow], profs[s.setting.readers[0]]))
    print(render_method_reader_matrix(communicability_cells(reports), "markdown", "Communicability issues"))
    print(render_method_reader_matrix(comprehensibility_cells(reports), "markdown", "Comprehensibility"))
    want = {r["session_id"]: set(r["codes"].split()) for r in presets.golden_communicability()}
    for r in reports:
        if r.session_id in want:
            mark = "ok" if set(r.codes) == want[r.session_id] else "MISMATCH"
            print(f"{mark:8} {r.session_id:32} {' '.join(r.codes) or '-'}")


if __name__ == "__main__":
    main()
