__all__ = [
    'SLS4DModel',
    'count_parameters'
]


from src.model.model import SLS4DModel, count_parameters
