from .spectrum_api import spectrum_api
from .msa_api import msa_api
from .simulate_api import simulate_api

__all__ = ['spectrum_api', 'msa_api', 'simulate_api']
