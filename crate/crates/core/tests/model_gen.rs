mod common;

use reqlift_core::ltl::Style;
use reqlift_core::model::{find_overlaps, parse_model, place_formula, Placement, TransitionModel};
use reqlift_core::types::{gather_evidence, merge_types, SymbolTable};

fn case_study_model() -> (TransitionModel, SymbolTable, Vec<Placement>) {
    let b = common::build(&["corpus.txt"]);
    (b.model, b.symbols, b.placements)
}

#[test]
fn placements_on_case_study() {
    let (m, _, placements) = case_study_model();
    let count = |p| placements.iter().filter(|&&q| q == p).count();
    assert_eq!(count(Placement::Definition), 11);
    assert_eq!(count(Placement::Initialization), 1);
    assert_eq!(count(Placement::Transition), 3);
    assert_eq!(placements[11], Placement::Initialization);
    assert_eq!(placements[12], Placement::Transition);
    assert_eq!(placements[3], Placement::Definition);
    assert_eq!(m.definitions.len(), 4);
    assert_eq!(m.transitions.len(), 3);
}

#[test]
fn inputs_assigned_before_reconciliation_are_rejected() {
    let fs = common::case_study();
    let (symbols, _) = merge_types(&gather_evidence(&fs), &common::config().partition);
    assert!(place_formula(&fs[3], &symbols, false).is_err());
}

#[test]
fn overlap_from_init() {
    let (m, symbols, _) = case_study_model();
    let overlaps = find_overlaps(&m, &symbols);
    assert_eq!(overlaps.len(), 1, "{overlaps:?}");
    assert_eq!(
        overlaps[0].condition.to_styled(Style::Sal),
        "Regulator_Status = TRUE AND Regulator_Init_Timeout = TRUE"
    );
}

#[test]
fn text_round_trips() {
    let (m, _, _) = case_study_model();
    let text = m.to_sal();
    assert_eq!(parse_model(&text).unwrap(), m, "{text}");
    assert!(!text.contains("Regulator_Interface_Failure'"));
    assert!(!text.contains("Regulator_Status'"));
}

#[test]
fn parses_multiline_definition() {
    let text = "model_1 : CONTEXT =
BEGIN
  Type1 : TYPE = {Invalid};
  Type3 : TYPE = [# Temp_attribute : INTEGER, Status_attribute : Type1 #];

  main : MODULE =
  BEGIN
    LOCAL Regulator_Interface_Failure : BOOLEAN
    LOCAL Lower_Desired_Temperature : Type3
    DEFINITION
      Regulator_Interface_Failure IN {Z : BOOLEAN |
        Lower_Desired_Temperature.Status_attribute = Invalid
        => Z = TRUE};
  END;
END
";
    let m = parse_model(text).unwrap();
    assert_eq!(m.definitions.len(), 1);
    assert_eq!(m.types.len(), 2);
    assert!(m.to_sal().contains(
        "Regulator_Interface_Failure IN {Z : BOOLEAN | Lower_Desired_Temperature.Status_attribute = Invalid => Z = TRUE};"
    ));
}
