use slowclt::summands::Family;
fn main(){
  let fam = Family::pareto_log(1.5,1.0).unwrap();
  for s in [1e-9,1e-6,1e-3,1.0f64] {
    let t0=std::time::Instant::now();
    let mut acc=0.0; for i in 0..100 { acc+=fam.one_minus_cf(s*(1.0+i as f64*1e-3)).unwrap(); }
    println!("s={s} {:?} per call {acc}", t0.elapsed()/100);
  }
}
