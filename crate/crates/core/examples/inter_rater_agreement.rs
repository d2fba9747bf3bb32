//! Agreement statistics on a small judgment set: Fleiss' kappa, its band,
//! Jaccard overlaps and thresholded overlap.

use irbench::evalkit::{
    complete_submatrix, fleiss_kappa, group_overlap, interpret_kappa, mean_pairwise_overlap, thresholded_mean_overlap,
    Judgment, Relevance,
};

const LABELS: [(&str, [u8; 8]); 4] = [
    ("ann", [1, 1, 0, 1, 0, 0, 1, 1]),
    ("ben", [1, 1, 0, 1, 0, 1, 1, 0]),
    ("cem", [1, 0, 0, 1, 0, 0, 1, 1]),
    ("dia", [1, 1, 0, 1, 1, 0, 0, 1]),
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let docs: Vec<String> = (1..=8).map(|i| format!("D{i}")).collect();
    let mut judgments = Vec::new();
    for (assessor, row) in LABELS {
        for (doc, &l) in docs.iter().zip(&row) {
            judgments.push(Judgment::new(assessor, 1, doc, Relevance::from_bool(l == 1)));
        }
    }
    // one assessor skipped a document and is dropped from the complete matrix
    judgments.push(Judgment::new("eve", 1, "D1", Relevance::Relevant));

    let m = complete_submatrix(&judgments, 1, &docs)?;
    println!("raters {:?}, {} subjects", m.raters, m.n_subjects());
    match fleiss_kappa(&m)? {
        Some(k) => println!("kappa {k:.3} ({})", interpret_kappa(k)),
        None => println!("kappa undefined"),
    }
    println!("mean pairwise Jaccard {:.3}", mean_pairwise_overlap(&m)?);
    println!("group overlap         {:.3}", group_overlap(&m)?.value);
    for t in [0.5, 0.8, 1.0] {
        println!("overlap at {t:.1}        {:.3}", thresholded_mean_overlap(&m, t)?);
    }
    Ok(())
}
