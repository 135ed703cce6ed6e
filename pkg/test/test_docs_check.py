import os
import shutil

from tkutils.docs_check import case_references, known_case_names, validate_docs

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

def copy_repo(tmp_path):
    shutil.copytree(os.path.join(REPO_ROOT, 'suites'), tmp_path / 'suites')
    shutil.copytree(os.path.join(REPO_ROOT, 'docs', 'scenarios'), tmp_path / 'docs' / 'scenarios')
    return tmp_path

def test_shipped_docs_cite_existing_cases():
    assert validate_docs(REPO_ROOT) == []

def test_every_scenario_doc_cites_a_case():
    scenario_dir = os.path.join(REPO_ROOT, 'docs', 'scenarios')
    docs = sorted(os.listdir(scenario_dir))
    assert len(docs) >= 4
    for doc in docs:
        assert case_references(os.path.join(scenario_dir, doc)), doc

def test_known_names_include_suites_checks_and_variants():
    names = known_case_names(REPO_ROOT)
    assert {'driver_assistance', 'update_phone_number', 'events_munich[zh]', 'memory_write_then_read'} <= names

def test_broken_reference_is_reported(tmp_path):
    root = copy_repo(tmp_path)
    (root / 'docs' / 'scenarios' / 'extra.md').write_text(
        '# Extra\n\nSee `case:no_such_case` and `case:update_phone_number`.\n', encoding='utf-8')
    broken = validate_docs(str(root))
    assert [(b.doc, b.case_name) for b in broken] == [(os.path.join('docs', 'scenarios', 'extra.md'), 'no_such_case')]
    assert "case 'no_such_case' does not exist" in str(broken[0])

def test_renamed_case_breaks_its_doc(tmp_path):
    root = copy_repo(tmp_path)
    path = root / 'suites' / 'integration' / 'regression_phone_update.case.json'
    path.write_text(path.read_text(encoding='utf-8').replace('"regression_phone_update"', '"phone_regression"'),
                    encoding='utf-8')
    assert 'regression_phone_update' in [b.case_name for b in validate_docs(str(root))]

def test_repo_without_scenario_docs_is_consistent(tmp_path):
    assert validate_docs(str(tmp_path)) == []

def test_site_uses_the_material_theme():
    with open(os.path.join(REPO_ROOT, 'mkdocs.yml'), encoding='utf-8') as fh:
        config = fh.read()
    with open(os.path.join(REPO_ROOT, 'requirements-docs.txt'), encoding='utf-8') as fh:
        requirements = fh.read()
    assert '\n  name: material\n' in config
    assert 'mkdocs-material' in requirements
