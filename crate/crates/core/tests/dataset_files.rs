use std::io::Write;

use hybrid_explain::config::{load_system, DatasetFormat};
use hybrid_explain::dataset::write_csv;
use hybrid_explain::reproduce::{case_config, export, reference_data, Case};
use hybrid_explain::{load_dataset, Error};

fn file_with(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn thousand_rows_three_columns() {
    let f = tempfile::NamedTempFile::new().unwrap();
    write_csv(&reference_data(0), f.as_file()).unwrap();
    let d = load_dataset(f.path(), DatasetFormat::Csv).unwrap();
    assert_eq!((d.len(), d.width()), (1000, 3));
    assert_eq!(d.columns(), ["x1", "x2", "x3"]);
    assert_eq!(d, reference_data(0));
}

#[test]
fn empty_and_header_only_files_fail() {
    assert!(matches!(
        load_dataset(file_with("").path(), DatasetFormat::Csv),
        Err(Error::Dataset(_))
    ));
    assert!(matches!(
        load_dataset(file_with("x1,x2,x3\n").path(), DatasetFormat::Csv),
        Err(Error::Dataset(_))
    ));
}

#[test]
fn non_numeric_cell_reports_position() {
    let f = file_with("x1,x2\n0.1,0.2\n0.3,0.4\n0.5,high\n");
    match load_dataset(f.path(), DatasetFormat::Csv) {
        Err(Error::DatasetParse { row, column, path, .. }) => {
            assert_eq!((row, column), (4, 2));
            assert_eq!(path, f.path());
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn missing_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        load_dataset(&dir.path().join("absent.csv"), DatasetFormat::Csv),
        Err(Error::Io { .. })
    ));
}

#[test]
fn exported_case_loads_with_relative_dataset() {
    let dir = tempfile::tempdir().unwrap();
    export(Case::Hybrid, 2, dir.path()).unwrap();
    let loaded = load_system(&dir.path().join("system.json")).unwrap();
    assert_eq!(loaded.config, case_config(Case::Hybrid));
    assert_eq!(loaded.dataset.unwrap(), reference_data(2));
    assert_eq!(loaded.system.feature_count(), 5);
}

#[test]
fn dataset_columns_must_match_inputs() {
    let dir = tempfile::tempdir().unwrap();
    export(Case::RulesGeneric, 0, dir.path()).unwrap();
    std::fs::write(dir.path().join("data.csv"), "x1,x3,x2\n0.1,0.2,0.3\n").unwrap();
    let loaded = load_system(&dir.path().join("system.json")).unwrap();
    let err = hybrid_explain::Scaler::fit(&loaded.system, loaded.dataset.as_ref().unwrap());
    assert!(matches!(err, Err(Error::Dataset(_))));
}
