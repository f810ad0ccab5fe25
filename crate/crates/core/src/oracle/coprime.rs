use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lti::ss::stabilizing_gain;
use crate::lti::{CMatrix, PlantModel, FrequencyResponse, Polynomial, RationalFn, Response, StateSpace, TransferMatrix};

/// Doubly coprime factors of `F G` plus the numerator of `G` itself.
///
/// `G = N M^-1`, `F G = N_F M^-1 = M~_F^-1 N~_F`, and
/// `[X~ -Y~; -N~_F M~_F] [M Y; N_F X] = I`.
#[derive(Clone, Debug)]
pub struct CoprimeFactors {
    pub n: Response,
    pub n_f: Response,
    pub m_right: Response,
    pub m_tilde: Response,
    pub n_tilde: Response,
    pub x: Response,
    pub y: Response,
    pub x_tilde: Response,
    pub y_tilde: Response,
    /// NMP zeros of `G`, shared by `N`.
    pub nmp_zeros: Vec<Complex64>,
}

impl CoprimeFactors {
    /// Largest deviation of the double Bezout product from the identity at `s`.
    pub fn bezout_residual(&self, s: Complex64) -> Result<f64> {
        let xt = self.x_tilde.eval(s)?;
        let yt = self.y_tilde.eval(s)?;
        let nt = self.n_tilde.eval(s)?;
        let mt = self.m_tilde.eval(s)?;
        let m = self.m_right.eval(s)?;
        let y = self.y.eval(s)?;
        let nf = self.n_f.eval(s)?;
        let x = self.x.eval(s)?;
        let (p, q) = (m.nrows(), mt.nrows());
        let mut left = CMatrix::zeros(p + q, p + q);
        left.view_mut((0, 0), (p, p)).copy_from(&xt);
        left.view_mut((0, p), (p, q)).copy_from(&(-yt));
        left.view_mut((p, 0), (q, p)).copy_from(&(-nt));
        left.view_mut((p, p), (q, q)).copy_from(&mt);
        let mut right = CMatrix::zeros(p + q, p + q);
        right.view_mut((0, 0), (p, p)).copy_from(&m);
        right.view_mut((0, p), (p, q)).copy_from(&y);
        right.view_mut((p, 0), (q, p)).copy_from(&nf);
        right.view_mut((p, p), (q, q)).copy_from(&x);
        let prod = left * right;
        Ok((prod - CMatrix::identity(p + q, p + q)).iter().map(|v| v.norm()).fold(0.0, f64::max))
    }
}

/// Doubly coprime factors of `F G`; scalar plants use the polynomial route.
pub fn doubly_coprime(plant: &PlantModel, f: &TransferMatrix) -> Result<CoprimeFactors> {
    let g = plant.g();
    let mut cf = if g.rows() == 1 && g.cols() == 1 {
        polynomial_route(g.get(0, 0), f.get(0, 0))?
    } else {
        state_space_route(g, f)?
    };
    cf.nmp_zeros = plant.nmp_zeros().to_vec();
    Ok(cf)
}

fn mirror_unstable(d: &Polynomial) -> Result<Polynomial> {
    if d.degree() == 0 {
        return Ok(Polynomial::one());
    }
    let roots: Vec<Complex64> = d
        .roots()?
        .into_iter()
        .map(|r| if r.re >= 0.0 { Complex64::new(-r.re.abs().max(1e-3), r.im) } else { r })
        .collect();
    Ok(Polynomial::from_roots(&roots))
}

/// Solves `a d - b q = r` with `deg b = deg d - 1`, `deg a = deg r - deg d`.
fn diophantine(d: &Polynomial, q: &Polynomial, r: &Polynomial) -> Result<(Polynomial, Polynomial)> {
    let nd = d.degree();
    let nr = r.degree();
    if nd == 0 {
        return Ok((r.scale(1.0 / d.coeff(0)), Polynomial::zero()));
    }
    let na = nr - nd;
    let nb = nd - 1;
    let unknowns = na + 1 + nb + 1;
    let eqs = nr + 1;
    if unknowns != eqs {
        return Err(Error::Construction("Diophantine system is not square".into()));
    }
    let mut sys = DMatrix::<f64>::zeros(eqs, unknowns);
    for i in 0..=na {
        for (k, c) in d.coeffs().iter().enumerate() {
            sys[(i + k, i)] += c;
        }
    }
    for i in 0..=nb {
        for (k, c) in q.coeffs().iter().enumerate() {
            if i + k < eqs {
                sys[(i + k, na + 1 + i)] -= c;
            }
        }
    }
    let rhs = DVector::from_fn(eqs, |k, _| r.coeff(k));
    let sol = sys
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Construction("plant and filter share an unstable factor".into()))?;
    let a = Polynomial::new(sol.rows(0, na + 1).iter().copied().collect());
    let b = Polynomial::new(sol.rows(na + 1, nb + 1).iter().copied().collect());
    Ok((a, b))
}

fn polynomial_route(g: &RationalFn, f: &RationalFn) -> Result<CoprimeFactors> {
    if !g.is_proper() || !f.is_proper() {
        return Err(Error::Construction("plant and filter must be proper".into()));
    }
    if g.poles()?.iter().any(|p| p.re.abs() <= 1e-9) {
        return Err(Error::Construction("poles on the imaginary axis cannot be stabilized by a proper coprime pair".into()));
    }
    let (n, d) = (g.num(), g.den());
    let (fnum, fden) = (f.num(), f.den());
    let c = mirror_unstable(d)?;
    let q = n * fnum;
    let rhs = &(&c * &c) * fden;
    let (a, b) = diophantine(d, &q, &rhs)?;
    let cf = &c * fden;
    let m = RationalFn::new(d.clone(), c.clone())?;
    let nn = RationalFn::new(n.clone(), c.clone())?;
    let nf = RationalFn::new(q, cf.clone())?;
    let xt = RationalFn::new(a, cf)?;
    let yt = RationalFn::new(b, c)?;
    let s = |r: RationalFn| Response::Exact(TransferMatrix::scalar(r));
    Ok(CoprimeFactors {
        n: s(nn),
        n_f: s(nf.clone()),
        m_right: s(m.clone()),
        m_tilde: s(m),
        n_tilde: s(nf),
        x: s(xt.clone()),
        y: s(yt.clone()),
        x_tilde: s(xt),
        y_tilde: s(yt),
        nmp_zeros: Vec::new(),
    })
}

fn ss_tm(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<Response> {
    let sys = StateSpace::new(a.clone(), b.clone(), c.clone(), d.clone())?;
    Ok(Response::pointwise(c.nrows(), b.ncols(), move |s| sys.eval(s)))
}

fn state_space_route(g: &TransferMatrix, f: &TransferMatrix) -> Result<CoprimeFactors> {
    let sg = StateSpace::realize(g)?;
    let sf = StateSpace::realize(f)?;
    let (ng, nf) = (sg.states(), sf.states());
    let (p, m) = (g.rows(), g.cols());
    if f.rows() != p || f.cols() != p {
        return Err(Error::Construction("filter must be square with the plant's output dimension".into()));
    }
    // F G as a series connection with states [x_G; x_F].
    let n = ng + nf;
    let mut a = DMatrix::zeros(n, n);
    a.view_mut((0, 0), (ng, ng)).copy_from(&sg.a);
    a.view_mut((ng, 0), (nf, ng)).copy_from(&(&sf.b * &sg.c));
    a.view_mut((ng, ng), (nf, nf)).copy_from(&sf.a);
    let mut b = DMatrix::zeros(n, m);
    b.view_mut((0, 0), (ng, m)).copy_from(&sg.b);
    b.view_mut((ng, 0), (nf, m)).copy_from(&(&sf.b * &sg.d));
    let mut c = DMatrix::zeros(p, n);
    c.view_mut((0, 0), (p, ng)).copy_from(&(&sf.d * &sg.c));
    c.view_mut((0, ng), (p, nf)).copy_from(&sf.c);
    let d = &sf.d * &sg.d;

    let kg = stabilizing_gain(&sg.a, &sg.b)?;
    let mut k = DMatrix::zeros(m, n);
    k.view_mut((0, 0), (m, ng)).copy_from(&kg);
    let l = stabilizing_gain(&a.transpose(), &c.transpose())?.transpose();

    let eye_m = DMatrix::<f64>::identity(m, m);
    let eye_p = DMatrix::<f64>::identity(p, p);
    let abk = &a + &b * &k;
    let cdk = &c + &d * &k;
    let alc = &a + &l * &c;
    let bld = &b + &l * &d;

    let agk = &sg.a + &sg.b * &kg;
    let n_g = ss_tm(&agk, &sg.b, &(&sg.c + &sg.d * &kg), &sg.d)?;
    let m_right = ss_tm(&abk, &b, &k, &eye_m)?;
    let n_f = ss_tm(&abk, &b, &cdk, &d)?;
    let y = ss_tm(&abk, &(-&l), &k, &DMatrix::zeros(m, p))?;
    let x = ss_tm(&abk, &(-&l), &cdk, &eye_p)?;
    let x_tilde = ss_tm(&alc, &(-&bld), &k, &eye_m)?;
    let y_tilde = ss_tm(&alc, &(-&l), &k, &DMatrix::zeros(m, p))?;
    let n_tilde = ss_tm(&alc, &bld, &c, &d)?;
    let m_tilde = ss_tm(&alc, &l, &c, &eye_p)?;
    Ok(CoprimeFactors { n: n_g, n_f, m_right, m_tilde, n_tilde, x, y, x_tilde, y_tilde, nmp_zeros: Vec::new() })
}
