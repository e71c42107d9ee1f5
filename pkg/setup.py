from setuptools import setup

with open('requirements.txt') as f:
    requirements = [line.strip() for line in f if line.strip() and not line.startswith('pytest')]

setup(
    name='zplab',
    version='0.1.0',
    description='Zeros of polynomials in the Riemann zeta function and its derivatives',
    py_modules=[
        'zplab', 'zplab_errors', 'settings', 'power_series', 'zeta_engine',
        'poly_expr', 'dirichlet', 'zero_finder', 'theorems',
    ],
    data_files=[('config', ['config/default.json'])],
    install_requires=requirements,
    extras_require={'test': ['pytest==7.4.3']},
    python_requires='>=3.9',
    entry_points={'console_scripts': ['zplab = zplab:main']},
)
