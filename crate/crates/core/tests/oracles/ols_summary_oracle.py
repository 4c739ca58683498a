"""Reference table for the pinned 30x3 regression fixture.

Every field is computed directly from its textbook formula with numpy and
mpmath (normal equations via an explicit inverse, moments by hand), not via
any regression library. statsmodels is used only as a cross-check.
"""
import math
import mpmath as mp
import numpy as np

mp.mp.dps = 40
rng = np.random.default_rng(20240611)
n, p = 30, 3
X = np.round(rng.normal(size=(n, p)) * [1.0, 3.0, 0.5] + [0.0, 5.0, -1.0], 4)
noise = np.round(rng.standard_t(df=4, size=n), 4)
y = np.round(2.5 + 1.2 * X[:, 0] - 0.4 * X[:, 1] + 0.9 * X[:, 2] + noise, 4)

def rust_rows(a):
    return ",\n".join("    [" + ", ".join(repr(float(v)) for v in row) + "]" for row in a)

print("// X")
print(rust_rows(X))
print("// y")
print("[" + ", ".join(repr(float(v)) for v in y) + "]")

D = np.column_stack([np.ones(n), X])
k = p + 1
XtX_inv = np.linalg.inv(D.T @ D)
beta = XtX_inv @ D.T @ y
e = y - D @ beta
ssr = float(e @ e)
sst = float(((y - y.mean()) ** 2).sum())
df_resid = n - k
sigma2 = ssr / df_resid
r2 = 1 - ssr / sst
adj = 1 - (1 - r2) * (n - 1) / df_resid
se = np.sqrt(sigma2 * np.diag(XtX_inv))
t = beta / se

def t_two_sided(tv, df):
    x = mp.mpf(df) / (df + mp.mpf(tv) ** 2)
    return float(mp.betainc(mp.mpf(df) / 2, mp.mpf(0.5), 0, x, regularized=True))

def t_quantile(q, df):
    # upper-tail inverse by root finding on the mpmath cdf
    f = lambda tv: mp.betainc(mp.mpf(df) / 2, mp.mpf(0.5), 0, df / (df + tv * tv), regularized=True) / 2 - (1 - q)
    return float(mp.findroot(f, 2.0))

pv = [t_two_sided(v, df_resid) for v in t]
tq = t_quantile(0.975, df_resid)
f_stat = ((sst - ssr) / p) / (ssr / df_resid)
f_p = float(mp.betainc(mp.mpf(df_resid) / 2, mp.mpf(p) / 2, 0, mp.mpf(df_resid) / (df_resid + p * mp.mpf(f_stat)), regularized=True))
ll = -n / 2 * (math.log(2 * math.pi) + math.log(ssr / n) + 1)
aic = 2 * (k + 1) - 2 * ll
bic = math.log(n) * (k + 1) - 2 * ll
aic_nv = 2 * k - 2 * ll
bic_nv = math.log(n) * k - 2 * ll
dw = float(np.sum(np.diff(e) ** 2) / ssr)
m = e - e.mean()
m2 = float(np.mean(m ** 2)); m3 = float(np.mean(m ** 3)); m4 = float(np.mean(m ** 4))
skew = m3 / m2 ** 1.5
kurt = m4 / m2 ** 2
jb = n / 6 * (skew ** 2 + (kurt - 3) ** 2 / 4)
jb_p = math.exp(-jb / 2)
ev = np.linalg.eigvalsh(D.T @ D)
cond = math.sqrt(ev.max() / ev.min())

fields = dict(r2=r2, adj_r2=adj, f_stat=f_stat, f_pvalue=f_p, log_likelihood=ll, aic=aic, bic=bic,
              aic_excluding_variance=aic_nv, bic_excluding_variance=bic_nv, durbin_watson=dw,
              jarque_bera=jb, jb_pvalue=jb_p, skew=skew, kurtosis=kurt, condition_number=cond, sigma2=sigma2)
for name, v in fields.items():
    print(f"{name} = {v!r}")
for j in range(k):
    lo, hi = beta[j] - tq * se[j], beta[j] + tq * se[j]
    print(f"coef[{j}] = ({beta[j]!r}, {se[j]!r}, {t[j]!r}, {pv[j]!r}, {lo!r}, {hi!r})")

try:
    import statsmodels.api as sm
    res = sm.OLS(y, D).fit()
    assert np.allclose(res.params, beta) and np.allclose(res.bse, se)
    assert abs(res.aic - aic_nv) < 1e-8 and abs(res.bic - bic_nv) < 1e-8
    assert abs(res.condition_number - cond) / cond < 1e-8
    assert np.allclose(res.pvalues, pv) and abs(res.f_pvalue - f_p) < 1e-12
    print("# statsmodels cross-check passed (statsmodels AIC/BIC exclude the variance parameter)")
except ImportError:
    print("# statsmodels unavailable; cross-check skipped")
