//! Rebuilds the report of the published study from its per-topic figures
//! and prints the recomputed averages next to the printed ones.

use irbench::study_fixture::{printed_averages, topic_metrics};
use irbench::report::ReportBundle;
use irbench::corpus::bundled_topics;
use irbench::run::ServiceLabel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let titles = bundled_topics().into_iter().map(|t| (t.topic_id, t.title)).collect();
    let bundle = ReportBundle::build(topic_metrics(), titles, 0.40, 0.35, None)?;
    print!("{}", bundle.render_text());

    let printed = printed_averages();
    println!("\nrecomputed vs printed");
    let rows = [
        ("all topics", &bundle.all_topics, &printed.unfiltered),
        ("kappa filter", &bundle.kappa_filtered, &printed.kappa_filtered),
        ("overlap filter", &bundle.overlap_filtered, &printed.overlap_filtered),
    ];
    for (name, got, want) in rows {
        let cells: Vec<String> = ServiceLabel::ALL
            .iter()
            .map(|s| {
                let g = got.precision.as_ref().and_then(|p| p.get(s)).copied().unwrap_or(f64::NAN);
                format!("{} {g:.3}/{:.3}", s.as_str(), want[s])
            })
            .collect();
        println!("{name:<15} {}", cells.join("  "));
    }
    Ok(())
}
