"""
配置管理模块
"""

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """应用配置类，从环境变量中读取配置"""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    log_level: str = Field(
        default="INFO",
        description="日志级别"
    )

    # 模拟器配置（单位：tick）
    sim_delay_min: int = Field(
        default=1,
        description="网络最小延迟"
    )
    sim_delay_max: int = Field(
        default=5,
        description="网络最大延迟"
    )
    sim_client_retry_timeout: int = Field(
        default=300,
        description="客户端写请求重试超时"
    )
    sim_read_retry_timeout: int = Field(
        default=150,
        description="客户端/批处理器读请求重试超时"
    )
    sim_proxy_retry_timeout: int = Field(
        default=60,
        description="代理领导者换列重发 Phase2a 的超时"
    )
    sim_phase1_retry_timeout: int = Field(
        default=60,
        description="领导者 Phase1 换行重试超时"
    )
    sim_recover_interval: int = Field(
        default=80,
        description="副本请求补洞的间隔"
    )
    sim_election_delay: int = Field(
        default=30,
        description="领导者崩溃后备用提议者发起选举的延迟"
    )

    # 线性一致性检查器配置
    checker_max_ops: int = Field(
        default=400,
        description="穷举搜索允许的最大操作数"
    )

    # 角色配置
    retained_slots: int = Field(
        default=10_000,
        ge=1,
        description="领导者与代理领导者为重发保留的最近槽数"
    )

    # serve 配置
    serve_host: str = Field(
        default="127.0.0.1",
        description="帧传输监听地址"
    )
    serve_port: int = Field(
        default=7400,
        description="帧传输监听端口"
    )
    serve_tick_ms: float = Field(
        default=1.0,
        description="一个 tick 对应的毫秒数"
    )
    serve_admin_port: int = Field(
        default=0,
        description="管理 HTTP 端口，0 表示不启动"
    )
    serve_max_frame_bytes: int = Field(
        default=16 * 1024 * 1024,
        description="单帧最大字节数"
    )

# 创建全局配置实例
settings = Settings()
