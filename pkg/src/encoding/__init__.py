__all__ = [
    'FrequencyEncoderConfig',
    'encode',
    'project_query',
    'QueryProjection'
]


from src.encoding.encoder import (
    FrequencyEncoderConfig,
    encode,
    project_query,
    QueryProjection
)
