from setuptools import setup, find_packages

setup(
    name="moplda",
    version="0.1",
    package_dir={"": "src"},
    packages=find_packages(where="src"),
    py_modules=["main"],
    install_requires=[
        "numpy>=1.24.0",
        "scipy>=1.10.0",
        "python-dotenv>=1.0.0",
        "cryptography>=41.0.0",
    ],
    entry_points={"console_scripts": ["moplda=main:run"]},
)
