use degradekit::quality::{
    evaluate_protocol, gmad_pairs, split_by_reference, FeatureTable, MosDataset, MosRow, ProtocolOptions, SplitRatios,
};

fn dataset() -> (MosDataset, FeatureTable) {
    let mut rows = Vec::new();
    let mut table = FeatureTable::new(2);
    for r in 0..15 {
        for k in 0..3 {
            let path = format!("img/{r}_{k}.png");
            let x = (r * 3 + k) as f64 / 45.0;
            let crops = (0..5).map(|c| vec![x + 0.001 * c as f64, (r % 4) as f64]).collect();
            table.insert(path.clone(), crops).unwrap();
            rows.push(MosRow {
                image_path: path,
                reference_id: format!("ref{r}"),
                mos: 3.0 * x + 1.0,
                reference_path: None,
            });
        }
    }
    (MosDataset::new(rows).unwrap(), table)
}

#[test]
fn csv_round_trips_feed_the_protocol() {
    let (ds, table) = dataset();
    let mut ds_csv = Vec::new();
    ds.to_writer(&mut ds_csv).unwrap();
    let mut t_csv = Vec::new();
    table.to_writer(&mut t_csv).unwrap();
    let ds2 = MosDataset::from_reader(ds_csv.as_slice()).unwrap();
    let t2 = FeatureTable::from_reader(t_csv.as_slice()).unwrap();
    assert_eq!(ds2, ds);
    assert_eq!(t2, table);

    let opts = ProtocolOptions { alpha: 1e-6, repeats: 5, ..ProtocolOptions::default() };
    let rep = evaluate_protocol(&ds2, &t2, &opts).unwrap();
    assert!((rep.median_srcc - 1.0).abs() < 1e-9);
}

#[test]
fn splits_partition_references() {
    let (ds, _) = dataset();
    let (a, b, c) = split_by_reference(&ds, SplitRatios::default(), 4).unwrap();
    assert_eq!(a.len() + b.len() + c.len(), ds.len());
    let (ra, rb, rc) = (a.reference_ids(), b.reference_ids(), c.reference_ids());
    assert!(ra.is_disjoint(&rb) && ra.is_disjoint(&rc) && rb.is_disjoint(&rc));
    assert_eq!((ra.len(), rb.len(), rc.len()), (11, 1, 3));
}

#[test]
fn gmad_extremes_lie_in_their_bins() {
    let defender: Vec<f64> = (0..60).map(|i| ((i * 37) % 60) as f64).collect();
    let attacker: Vec<f64> = (0..60).map(|i| ((i * 11) % 13) as f64).collect();
    let pairs = gmad_pairs(&defender, &attacker, 3).unwrap();
    for p in &pairs {
        let lo = p.level as f64 * 20.0;
        for idx in [p.low_index, p.high_index] {
            assert!((lo..lo + 20.0).contains(&defender[idx]));
        }
        assert!(attacker[p.low_index] <= attacker[p.high_index]);
    }
}
