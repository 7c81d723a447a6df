use wavespec::htest::{wst, TestConfig};
use wavespec::models::{simulate, ModelId, ModelName};
use wavespec::spectral::{group_summary, raw_periodogram};
use wavespec::wavelet::{correct_periodogram, inner_product_matrix};
use wavespec::RandomSource;

fn main() {
    let a = inner_product_matrix(8).unwrap();
    let n = 25usize;
    let gen = |group: u8, off: u64| -> Vec<_> {
        (0..n as u64)
            .map(|i| {
                let mut rs = RandomSource::new(1, off + i);
                let x = simulate(ModelId::new(ModelName::P1, group).unwrap(), &mut rs).unwrap();
                correct_periodogram(&raw_periodogram(&x).unwrap(), &a).unwrap()
            })
            .collect()
    };
    let s1 = group_summary(&gen(1, 0), 1).unwrap();
    let s2 = group_summary(&gen(2, 100), 2).unwrap();
    let res = wst(&s1, &s2, &TestConfig::default()).unwrap();
    let mut band = Vec::new();
    let mut out_max = 0.0f64;
    for c in &res.cells {
        if let wavespec::htest::CellCoord::TimeScale { level, time } = c.coord {
            if level == 1 && (56..156).contains(&time) {
                band.push(c.statistic);
            } else {
                out_max = out_max.max(c.statistic.abs());
            }
        }
    }
    band.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mean = band.iter().sum::<f64>() / band.len() as f64;
    println!("band mean t = {mean:.3}, min {:.3}, max {:.3}", band[0], band[band.len()-1]);
    println!("out-of-band max |t| = {out_max:.3}");
    println!("mean L1 in band g1 = {:.3} g2 = {:.3}", 
        (56..156).map(|k| s1.mean_grid.get(1,k)).sum::<f64>()/100.0,
        (56..156).map(|k| s2.mean_grid.get(1,k)).sum::<f64>()/100.0);
    println!("mean var1 in band = {:.3}", (56..156).map(|k| s1.var_grid.get(1,k)).sum::<f64>()/100.0);
    println!("rejections: {}", res.n_rejections);
}
